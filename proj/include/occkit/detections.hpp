#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "occkit/dataset.hpp"

namespace occkit::io {

struct DetectionRecord {
    Id image_id = 0;
    Id category_id = 0;
    double score = 0.0;
    mask::RleMask mask;
};

/// Reads a COCO results array ({image_id, category_id, score, segmentation}).
/// Records come back ordered by image id, then descending score; equal
/// scores keep file order. Throws ValidationError for a score outside [0, 1].
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);
std::vector<DetectionRecord> parse_detections(const std::string& text);

}  // namespace occkit::io
