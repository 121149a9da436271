#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "occkit/dataset.hpp"
#include "occkit/depth.hpp"
#include "occkit/trilayer_io.hpp"

namespace occkit::occlusion {

using io::Id;

/// One instance of a single image, with masks decoded at image size.
struct ImageObject {
    Id annotation_id = 0;
    mask::BinaryMask modal;
    std::optional<mask::BinaryMask> amodal;
    bool is_crowd = false;
};

/// Builds ImageObjects for every annotation of `image_id`, in id order.
std::vector<ImageObject> image_objects(const io::Dataset& dataset, Id image_id);

/// Measured pairwise evidence. i_a = |amodal(A) & modal(B)|,
/// i_b = |amodal(B) & modal(A)|; d_a, d_b are mean depths over the modal
/// pixels, absent when no depth map was supplied.
struct OcclusionEvidence {
    Id a = 0;
    Id b = 0;
    std::size_t i_a = 0;
    std::size_t i_b = 0;
    std::optional<double> d_a;
    std::optional<double> d_b;

    friend bool operator==(const OcclusionEvidence&, const OcclusionEvidence&) = default;
};

struct OcclusionRelation {
    Id occludee_id = 0;
    Id occluder_id = 0;
    OcclusionEvidence evidence;

    friend bool operator==(const OcclusionRelation&, const OcclusionRelation&) = default;
};

enum class Order { kNone, kAOccludedByB, kBOccludedByA };

struct PairSkip {
    Id a = 0;
    Id b = 0;
    std::string reason;

    friend bool operator==(const PairSkip&, const PairSkip&) = default;
};

struct ReasonerConfig {
    int contact_radius = 1;
    bool require_depth = true;
};

/// Unordered pairs (smaller id first, sorted) whose modal masks meet once
/// both are dilated by `contact_radius`, i.e. some pixels lie within
/// Chebyshev distance 2 * contact_radius. Crowd objects never pair.
std::vector<std::pair<Id, Id>> find_connected_pairs(std::span<const ImageObject> objects,
                                                    int contact_radius);

/// Returns a skip when either object lacks an amodal mask or has an empty
/// modal mask. `depth` may be null.
std::variant<OcclusionEvidence, PairSkip> compute_evidence(const ImageObject& a,
                                                           const ImageObject& b,
                                                           const io::DepthMap* depth);

/// A is occluded by B iff i_a > i_b and, when depth is required, d_a > d_b.
/// Ties and depth contradictions give kNone. Missing depth under
/// require_depth also gives kNone.
Order decide_order(const OcclusionEvidence& evidence, bool require_depth);

/// One target per non-crowd object, ordered like `objects`. Each target
/// unions the modal masks of the object's occluders and of its occludees.
std::vector<io::TriLayerTarget> build_trilayer_targets(std::span<const ImageObject> objects,
                                                       std::span<const OcclusionRelation> relations);

struct ImageReasoning {
    std::vector<OcclusionRelation> relations;
    std::vector<io::TriLayerTarget> targets;
    std::vector<PairSkip> skips;
};

/// Pairs -> evidence -> verdicts -> targets for one image. Bad pairs are
/// skipped with a reason; the image is never aborted. When depth is
/// required but `depth` is null, every pair is skipped.
ImageReasoning reason_image(std::span<const ImageObject> objects, const io::DepthMap* depth,
                            const ReasonerConfig& config);

}  // namespace occkit::occlusion
