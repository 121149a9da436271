#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "occkit/occlusion.hpp"
#include "occkit/trilayer_io.hpp"

namespace occkit::splits {

using io::Id;

enum class ObjectClass { kSeparated, kOccluded, kNeither };

struct SplitConfig {
    mask::Connectivity connectivity = mask::Connectivity::kEight;
    /// Components smaller than this are ignored when counting pieces.
    std::size_t min_piece_area = 1;
    int workers = 1;
};

struct SplitManifest {
    std::string split_name;  // "separated" or "occluded"
    std::vector<Id> member_ids;  // ascending
    std::map<Id, std::size_t> per_category;
    std::size_t total = 0;

    friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

struct SplitStatistics {
    std::size_t total_objects = 0;  // non-crowd
    std::size_t separated = 0;
    std::size_t occluded = 0;
    std::size_t occluder_masks = 0;  // non-empty merged occluder masks
    std::size_t occludee_masks = 0;
};

struct SplitResult {
    SplitManifest separated;
    SplitManifest occluded;
    SplitStatistics stats;
};

/// Number of connected pieces of at least `min_piece_area` pixels.
int count_pieces(const mask::BinaryMask& modal, const SplitConfig& config);

/// Separated when the modal mask has >= 2 qualifying pieces; otherwise
/// occluded when the object is an occludee; otherwise neither.
ObjectClass classify_object(const mask::BinaryMask& modal, bool is_occludee,
                            const SplitConfig& config);
ObjectClass classify_object(const mask::BinaryMask& modal, Id annotation_id,
                            std::span<const occlusion::OcclusionRelation> relations,
                            const SplitConfig& config);

/// Classifies every non-crowd annotation. An annotation is an occludee when
/// its target lists at least one occluder.
SplitResult build_splits(const io::Dataset& dataset, std::span<const io::TriLayerTarget> targets,
                         const SplitConfig& config);

/// {"split", "total", "per_category", "annotation_ids"} as canonical JSON.
std::string format_manifest(const SplitManifest& manifest);
SplitManifest parse_manifest(const std::string& text);
SplitManifest load_manifest(const std::filesystem::path& path);

/// Human-readable statistics table.
std::string format_statistics(const SplitStatistics& stats);

}  // namespace occkit::splits
