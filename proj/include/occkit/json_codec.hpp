#pragma once

// JSON <-> value conversions shared by the file formats.

#include <string>

#include "json.hpp"
#include "occkit/dataset.hpp"

namespace occkit::io {

using Json = nlohmann::json;

/// {"size": [h, w], "counts": [...]} (uncompressed COCO RLE).
Json rle_to_json(const mask::RleMask& rle);
mask::RleMask rle_from_json(const Json& j, const std::string& context);

Json segmentation_to_json(const Segmentation& seg);
Segmentation segmentation_from_json(const Json& j, const std::string& context);

Json image_to_json(const ImageInfo& image);
Json category_to_json(const Category& category);
Json annotation_to_json(const AnnotationRecord& ann);

/// Canonical text: sorted keys (nlohmann's default object ordering),
/// two-space indent, shortest round-trip doubles, trailing newline.
std::string canonical_dump(const Json& j);

Json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const Json& root);

}  // namespace occkit::io
