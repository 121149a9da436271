#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "occkit/dataset.hpp"

namespace occkit::io {

/// Merged occluder / occludee modal masks for one annotation. Either mask
/// may be all-zero.
struct TriLayerTarget {
    Id annotation_id = 0;
    mask::RleMask occluder_mask;
    mask::RleMask occludee_mask;
    std::vector<Id> occluder_ids;  // ascending
    std::vector<Id> occludee_ids;  // ascending

    friend bool operator==(const TriLayerTarget&, const TriLayerTarget&) = default;
};

struct TriLayerFile {
    Dataset dataset;
    /// Ordered by annotation id.
    std::vector<TriLayerTarget> targets;

    friend bool operator==(const TriLayerFile&, const TriLayerFile&) = default;
};

/// COCO file where each annotation with a target gains "occluder_rle",
/// "occludee_rle", "occluder_ids" and "occludee_ids". Output is canonical:
/// sorted keys, records ordered by id. Throws ValidationError when a target
/// names an annotation that does not exist or lists an id on both sides.
std::string format_trilayer(const Dataset& dataset, const std::vector<TriLayerTarget>& targets);
void save_trilayer(const Dataset& dataset, const std::vector<TriLayerTarget>& targets,
                   const std::filesystem::path& path);

TriLayerFile parse_trilayer(const std::string& text);
TriLayerFile load_trilayer(const std::filesystem::path& path);

}  // namespace occkit::io
