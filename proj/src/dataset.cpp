#include "occkit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "occkit/json_codec.hpp"

namespace occkit::io {

Dataset::Dataset(std::vector<ImageInfo> images, std::vector<AnnotationRecord> annotations,
                 std::vector<Category> categories)
    : images_(std::move(images)),
      annotations_(std::move(annotations)),
      categories_(std::move(categories)) {
    auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
    std::sort(images_.begin(), images_.end(), by_id);
    std::sort(categories_.begin(), categories_.end(), by_id);
    std::sort(annotations_.begin(), annotations_.end(),
              [](const AnnotationRecord& a, const AnnotationRecord& b) {
                  return a.annotation_id < b.annotation_id;
              });
    index();
}

void Dataset::index() {
    image_index_.clear();
    annotation_index_.clear();
    by_image_.clear();
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (!image_index_.emplace(images_[i].id, i).second) {
            throw ParseError("duplicate image id " + std::to_string(images_[i].id));
        }
    }
    for (std::size_t i = 0; i < annotations_.size(); ++i) {
        const auto& a = annotations_[i];
        if (!annotation_index_.emplace(a.annotation_id, i).second) {
            throw ParseError("duplicate annotation id " + std::to_string(a.annotation_id));
        }
        if (!image_index_.contains(a.image_id)) {
            throw ParseError("annotation " + std::to_string(a.annotation_id) +
                             ": dangling image_id " + std::to_string(a.image_id));
        }
        by_image_[a.image_id].push_back(i);
    }
}

const ImageInfo* Dataset::find_image(Id id) const {
    const auto it = image_index_.find(id);
    return it == image_index_.end() ? nullptr : &images_[it->second];
}

const AnnotationRecord* Dataset::find_annotation(Id id) const {
    const auto it = annotation_index_.find(id);
    return it == annotation_index_.end() ? nullptr : &annotations_[it->second];
}

std::vector<std::size_t> Dataset::annotations_of(Id image_id) const {
    const auto it = by_image_.find(image_id);
    return it == by_image_.end() ? std::vector<std::size_t>{} : it->second;
}

void Dataset::set_amodal(Id annotation_id, mask::RleMask amodal) {
    const auto it = annotation_index_.find(annotation_id);
    if (it == annotation_index_.end()) {
        throw ValidationError("amodal mask for unknown annotation " + std::to_string(annotation_id));
    }
    auto& ann = annotations_[it->second];
    const ImageInfo& image = *find_image(ann.image_id);
    if (amodal.height != image.height || amodal.width != image.width) {
        throw ValidationError("annotation " + std::to_string(annotation_id) +
                              ": amodal mask size differs from image");
    }
    ann.amodal = std::move(amodal);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

Dataset parse_coco(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    try {
        return dataset_from_json(root);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("COCO schema: ") + e.what());
    }
}

Dataset load_coco(const std::filesystem::path& path) {
    try {
        return parse_coco(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void load_amodal_sidecar(const std::filesystem::path& path, Dataset& dataset) {
    Json root;
    try {
        root = Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": invalid JSON: " + e.what());
    }
    if (!root.is_array()) throw ParseError(path.string() + ": amodal sidecar must be an array");
    for (const auto& entry : root) {
        if (!entry.is_object() || !entry.contains("annotation_id") ||
            !entry["annotation_id"].is_number_integer() || !entry.contains("amodal_rle")) {
            throw ParseError(path.string() +
                             ": sidecar entries need \"annotation_id\" and \"amodal_rle\"");
        }
        const Id id = entry["annotation_id"].get<Id>();
        const std::string ctx = path.string() + ": annotation " + std::to_string(id);
        if (dataset.find_annotation(id) == nullptr) {
            throw ParseError(ctx + ": not present in the annotation file");
        }
        dataset.set_amodal(id, rle_from_json(entry["amodal_rle"], ctx));
    }
}

mask::BinaryMask modal_mask(const AnnotationRecord& ann, const ImageInfo& image) {
    if (const auto* rle = std::get_if<mask::RleMask>(&ann.modal)) return mask::rle_decode(*rle);
    return mask::rasterize(std::get<mask::PolygonSet>(ann.modal), image.height, image.width);
}

std::optional<mask::BinaryMask> amodal_mask(const AnnotationRecord& ann) {
    if (!ann.amodal) return std::nullopt;
    return mask::rle_decode(*ann.amodal);
}

BBox bbox_of(const mask::BinaryMask& m) {
    const auto box = mask::bounding_box(m);
    if (box.empty()) return {};
    return {static_cast<double>(box.col0), static_cast<double>(box.row0),
            static_cast<double>(box.col1 - box.col0 + 1),
            static_cast<double>(box.row1 - box.row0 + 1)};
}

}  // namespace occkit::io
