#include "occkit/detections.hpp"

#include <algorithm>
#include <cmath>

#include "occkit/json_codec.hpp"

namespace occkit::io {

std::vector<DetectionRecord> parse_detections(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_array()) throw ParseError("detections file must be a JSON array");

    std::vector<DetectionRecord> out;
    out.reserve(root.size());
    for (std::size_t i = 0; i < root.size(); ++i) {
        const Json& j = root[i];
        const std::string ctx = "detection #" + std::to_string(i);
        if (!j.is_object()) throw ParseError(ctx + ": expected an object");
        for (const char* key : {"image_id", "category_id", "score", "segmentation"}) {
            if (!j.contains(key)) throw ParseError(ctx + ": missing key \"" + key + "\"");
        }
        if (!j["image_id"].is_number_integer() || !j["category_id"].is_number_integer()) {
            throw ParseError(ctx + ": image_id and category_id must be integers");
        }
        if (!j["score"].is_number()) throw ParseError(ctx + ": score must be a number");
        DetectionRecord d;
        d.image_id = j["image_id"].get<Id>();
        d.category_id = j["category_id"].get<Id>();
        d.score = j["score"].get<double>();
        if (!std::isfinite(d.score) || d.score < 0.0 || d.score > 1.0) {
            throw ValidationError(ctx + ": score " + j["score"].dump() + " outside [0, 1]");
        }
        d.mask = rle_from_json(j["segmentation"], ctx);
        out.push_back(std::move(d));
    }
    std::stable_sort(out.begin(), out.end(), [](const DetectionRecord& a, const DetectionRecord& b) {
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.score > b.score;
    });
    return out;
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
    try {
        return parse_detections(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace occkit::io
