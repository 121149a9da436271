#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "occkit/mask.hpp"

namespace occkit::io {

using Id = std::int64_t;

struct ImageInfo {
    Id id = 0;
    int width = 0;
    int height = 0;
    std::string file_name;

    friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct Category {
    Id id = 0;
    std::string name;
    std::string supercategory;

    friend bool operator==(const Category&, const Category&) = default;
};

struct BBox {
    double x = 0, y = 0, w = 0, h = 0;

    friend bool operator==(const BBox&, const BBox&) = default;
};

using Segmentation = std::variant<mask::PolygonSet, mask::RleMask>;

struct AnnotationRecord {
    Id annotation_id = 0;
    Id image_id = 0;
    Id category_id = 0;
    Segmentation modal;
    std::optional<mask::RleMask> amodal;
    BBox bbox;
    bool is_crowd = false;

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// A parsed COCO annotation file. Images, annotations and categories are
/// kept sorted by id so that two files that differ only in array order
/// load to equal values.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<ImageInfo> images, std::vector<AnnotationRecord> annotations,
            std::vector<Category> categories);

    const std::vector<ImageInfo>& images() const noexcept { return images_; }
    const std::vector<AnnotationRecord>& annotations() const noexcept { return annotations_; }
    const std::vector<Category>& categories() const noexcept { return categories_; }

    const ImageInfo* find_image(Id id) const;
    const AnnotationRecord* find_annotation(Id id) const;
    /// Indices into annotations() for one image, in annotation id order.
    std::vector<std::size_t> annotations_of(Id image_id) const;

    /// Attaches (or replaces) amodal masks by annotation id.
    void set_amodal(Id annotation_id, mask::RleMask amodal);

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    void index();

    std::vector<ImageInfo> images_;
    std::vector<AnnotationRecord> annotations_;
    std::vector<Category> categories_;
    std::map<Id, std::size_t> image_index_;
    std::map<Id, std::size_t> annotation_index_;
    std::map<Id, std::vector<std::size_t>> by_image_;
};

/// Loads a COCO annotation file. Polygon and uncompressed RLE segmentations
/// are accepted; an optional per-annotation "amodal_rle" field is read as
/// the amodal mask. Throws ParseError (naming the annotation id where one
/// exists) or IoError.
Dataset load_coco(const std::filesystem::path& path);
Dataset parse_coco(const std::string& text);

/// Reads an amodal sidecar: a JSON array of {"annotation_id", "amodal_rle"}
/// objects, and attaches each mask to `dataset`.
void load_amodal_sidecar(const std::filesystem::path& path, Dataset& dataset);

/// Rasterizes or decodes the modal segmentation at the image's size.
mask::BinaryMask modal_mask(const AnnotationRecord& ann, const ImageInfo& image);

/// Decodes the amodal mask when present.
std::optional<mask::BinaryMask> amodal_mask(const AnnotationRecord& ann);

/// Tight pixel box of a mask in COCO (x, y, w, h) form.
BBox bbox_of(const mask::BinaryMask& m);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace occkit::io
