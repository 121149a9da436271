#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "occkit/dataset.hpp"
#include "occkit/png.hpp"

namespace occkit::synth {

using io::Id;

struct SynthConfig {
    /// Fractions of the victim's modal area.
    double min_overlap = 0.05;
    double min_visible = 0.2;
    std::size_t min_donor_area = 32 * 32;
    int max_tries = 50;
    /// Slot budget is count * max_slot_factor before giving up.
    int max_slot_factor = 4;
    int workers = 1;
};

/// A donor instance cut to its tight box.
struct DonorInstance {
    Id annotation_id = 0;
    Id image_id = 0;
    mask::BinaryMask patch;
};

/// Top-left corner of the donor patch in victim-image pixels. May lie
/// partly outside the canvas; the pasted mask is clipped.
struct Placement {
    int x = 0;
    int y = 0;

    friend bool operator==(const Placement&, const Placement&) = default;
};

struct PasteSample {
    Id image_id = 0;
    Id victim_annotation_id = 0;
    Id donor_annotation_id = 0;
    Id category_id = 0;
    std::uint64_t rng_seed = 0;
    Placement placement;
    mask::RleMask visible_mask;   // amodal_target minus pasted_mask
    mask::RleMask amodal_target;  // victim's original modal mask
    mask::RleMask pasted_mask;

    friend bool operator==(const PasteSample&, const PasteSample&) = default;
};

enum class PasteRejection { kEmptyVictim, kEmptyDonor, kInsufficientOverlap, kInsufficientVisible };

const char* to_string(PasteRejection r);

/// Donor patch translated into a height x width canvas.
mask::BinaryMask place_donor(const mask::BinaryMask& patch, Placement placement, int height,
                             int width);

/// Checks one explicit placement. Accepted samples satisfy
/// visible == amodal_target - pasted and both fraction constraints.
std::variant<PasteSample, PasteRejection> paste_occlusion(const io::AnnotationRecord& victim,
                                                          const mask::BinaryMask& victim_modal,
                                                          const DonorInstance& donor,
                                                          Placement placement,
                                                          std::uint64_t seed,
                                                          const SynthConfig& config);

/// Dilated modal mask used as the amodal-completion input.
mask::BinaryMask prepare_amodal_input(const mask::BinaryMask& modal, int dilation_radius);

/// Non-crowd instances with area >= config.min_donor_area.
std::vector<DonorInstance> collect_donors(const io::Dataset& dataset, const SynthConfig& config);

/// Per-slot seed: a SplitMix64 mix of the corpus seed and slot index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t slot);

struct Corpus {
    std::vector<PasteSample> samples;
    std::size_t slots_used = 0;
    bool exhausted = false;  // fewer than the requested count were found
};

/// Up to `count` samples, a pure function of (dataset, config, seed).
Corpus generate_corpus(const io::Dataset& dataset, std::size_t count, const SynthConfig& config,
                       std::uint64_t seed);

/// Copies donor pixels under the placed patch mask onto `target`.
/// `donor_pixels` covers the patch box and has the target's channel count.
io::RasterImage composite(const io::RasterImage& target, const io::RasterImage& donor_pixels,
                          const mask::BinaryMask& patch, Placement placement);

/// COCO superset: one annotation per sample whose segmentation is the
/// visible mask, plus visible_rle / amodal_rle / pasted_rle and
/// provenance fields.
std::string format_samples(const io::Dataset& dataset, const std::vector<PasteSample>& samples);
std::vector<PasteSample> parse_samples(const std::string& text);

}  // namespace occkit::synth
