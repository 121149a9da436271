#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occkit/dataset.hpp"
#include "occkit/detections.hpp"
#include "occkit/splits.hpp"

namespace occkit::eval {

using io::Id;

struct RecallConfig {
    double conf_thr = 0.3;
    double iou_thr = 0.75;
    bool require_category = true;
};

struct ObjectHit {
    Id annotation_id = 0;
    bool recalled = false;
    /// Best IoU among same-image detections that pass the score (and
    /// category) filter, and the score of that detection; 0 when none.
    double best_iou = 0.0;
    double best_score = 0.0;
};

struct RecallReport {
    std::string split_name;
    std::size_t recalled = 0;
    std::size_t total = 0;
    std::string percent;  // two decimals, e.g. "58.81"
    std::vector<ObjectHit> per_object;
};

/// round(100 * recalled / total, 2) with exactly two decimals, computed in
/// integer arithmetic (half rounds up). total == 0 gives "0.00".
std::string format_percent(std::size_t recalled, std::size_t total);

/// "3264(58.81%)".
std::string format_count_percent(std::size_t recalled, std::size_t total);

/// A ground-truth object is recalled iff some detection in its image has
/// score > conf_thr and mask IoU > iou_thr (and the same category when
/// required). One detection may recall several objects.
RecallReport eval_recall(const splits::SplitManifest& manifest, const io::Dataset& gt,
                         std::span<const io::DetectionRecord> detections,
                         const RecallConfig& config = {});

/// Mean per-object mask IoU x 100. A missing prediction scores 0. Throws
/// ValidationError for zero objects or size mismatches.
double eval_miou_gtbox(std::span<const mask::BinaryMask> gt,
                       std::span<const std::optional<mask::BinaryMask>> predictions);

/// "%.1f".
std::string format_miou(double miou);

/// Source category id -> target category name, or nullopt for "drop".
struct CategoryMapping {
    std::map<Id, std::optional<std::string>> source_to_target;
    std::map<Id, std::string> source_names;
};

/// Reads {"mapping": [{"id", "name", "maps_to"}...]} (maps_to may be null).
CategoryMapping load_category_mapping(const std::filesystem::path& path);
CategoryMapping parse_category_mapping(const std::string& text);

/// Remaps every annotation to the target category named by `mapping`,
/// resolved against `target_categories`; objects mapped to none are
/// dropped. Throws ValidationError for an unmapped source id or a target
/// name missing from `target_categories`.
io::Dataset map_categories(const CategoryMapping& mapping, const io::Dataset& gt,
                           std::span<const io::Category> target_categories);

struct AmodalMatch {
    Id target_id = 0;
    Id source_id = 0;
    double iou = 0.0;

    friend bool operator==(const AmodalMatch&, const AmodalMatch&) = default;
};

inline constexpr double kAmodalTransferIou = 0.7;

/// Greedy one-to-one matching by descending modal IoU within images
/// sharing an id; only pairs with IoU > min_iou are eligible. Source
/// annotations without an amodal mask never match. Ordered by target id.
std::vector<AmodalMatch> transfer_amodal_gt(const io::Dataset& source, const io::Dataset& target,
                                            double min_iou = kAmodalTransferIou);

/// Mean amodal IoU x 100 of predictions against the transferred source
/// amodal masks. A missing prediction scores 0. Throws on zero matches.
double eval_amodal_completion(std::span<const AmodalMatch> matches, const io::Dataset& source,
                              const std::map<Id, mask::BinaryMask>& predictions);

/// Plain-text table of one or more reports.
std::string format_recall_table(std::span<const RecallReport> reports);
std::string recall_report_json(const RecallReport& report, const RecallConfig& config);

}  // namespace occkit::eval
