#include "occkit/trilayer_io.hpp"

#include <algorithm>
#include <map>

#include "occkit/json_codec.hpp"

namespace occkit::io {

namespace {

void validate_target(const Dataset& dataset, const TriLayerTarget& t) {
    const AnnotationRecord* ann = dataset.find_annotation(t.annotation_id);
    if (!ann) {
        throw ValidationError("tri-layer target references unknown annotation " +
                              std::to_string(t.annotation_id));
    }
    const ImageInfo& image = *dataset.find_image(ann->image_id);
    for (const auto* m : {&t.occluder_mask, &t.occludee_mask}) {
        if (m->height != image.height || m->width != image.width) {
            throw ValidationError("annotation " + std::to_string(t.annotation_id) +
                                  ": tri-layer mask size differs from image");
        }
    }
    for (const auto* ids : {&t.occluder_ids, &t.occludee_ids}) {
        for (Id id : *ids) {
            if (!dataset.find_annotation(id)) {
                throw ValidationError("annotation " + std::to_string(t.annotation_id) +
                                      ": dangling related id " + std::to_string(id));
            }
        }
    }
    for (Id id : t.occluder_ids) {
        if (std::find(t.occludee_ids.begin(), t.occludee_ids.end(), id) != t.occludee_ids.end()) {
            throw ValidationError("annotation " + std::to_string(t.annotation_id) + ": id " +
                                  std::to_string(id) + " is both occluder and occludee");
        }
    }
}

std::vector<Id> ids_from_json(const Json& j, const std::string& ctx) {
    if (!j.is_array()) throw ParseError(ctx + ": id list must be an array");
    std::vector<Id> ids;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ParseError(ctx + ": ids must be integers");
        ids.push_back(v.get<Id>());
    }
    return ids;
}

}  // namespace

std::string format_trilayer(const Dataset& dataset, const std::vector<TriLayerTarget>& targets) {
    std::map<Id, const TriLayerTarget*> by_id;
    for (const auto& t : targets) {
        validate_target(dataset, t);
        if (!by_id.emplace(t.annotation_id, &t).second) {
            throw ValidationError("duplicate tri-layer target for annotation " +
                                  std::to_string(t.annotation_id));
        }
    }
    Json root = dataset_to_json(dataset);
    for (auto& a : root["annotations"]) {
        const auto it = by_id.find(a["id"].get<Id>());
        if (it == by_id.end()) continue;
        const TriLayerTarget& t = *it->second;
        auto sorted = [](std::vector<Id> v) {
            std::sort(v.begin(), v.end());
            return v;
        };
        a["occluder_rle"] = rle_to_json(t.occluder_mask);
        a["occludee_rle"] = rle_to_json(t.occludee_mask);
        a["occluder_ids"] = sorted(t.occluder_ids);
        a["occludee_ids"] = sorted(t.occludee_ids);
    }
    return canonical_dump(root);
}

void save_trilayer(const Dataset& dataset, const std::vector<TriLayerTarget>& targets,
                   const std::filesystem::path& path) {
    write_text_file(path, format_trilayer(dataset, targets));
}

TriLayerFile parse_trilayer(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    TriLayerFile out;
    try {
        out.dataset = dataset_from_json(root);
        for (const auto& a : root["annotations"]) {
            const bool has_any = a.contains("occluder_rle") || a.contains("occludee_rle") ||
                                 a.contains("occluder_ids") || a.contains("occludee_ids");
            if (!has_any) continue;
            const Id id = a["id"].get<Id>();
            const std::string ctx = "annotation " + std::to_string(id);
            for (const char* key : {"occluder_rle", "occludee_rle", "occluder_ids", "occludee_ids"}) {
                if (!a.contains(key)) throw ParseError(ctx + ": missing key \"" + key + "\"");
            }
            TriLayerTarget t;
            t.annotation_id = id;
            t.occluder_mask = rle_from_json(a["occluder_rle"], ctx + " occluder_rle");
            t.occludee_mask = rle_from_json(a["occludee_rle"], ctx + " occludee_rle");
            t.occluder_ids = ids_from_json(a["occluder_ids"], ctx);
            t.occludee_ids = ids_from_json(a["occludee_ids"], ctx);
            validate_target(out.dataset, t);
            out.targets.push_back(std::move(t));
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("tri-layer schema: ") + e.what());
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
    std::sort(out.targets.begin(), out.targets.end(),
              [](const TriLayerTarget& a, const TriLayerTarget& b) {
                  return a.annotation_id < b.annotation_id;
              });
    return out;
}

TriLayerFile load_trilayer(const std::filesystem::path& path) {
    try {
        return parse_trilayer(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace occkit::io
