#include "occkit/synth.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "occkit/json_codec.hpp"
#include "occkit/parallel.hpp"

namespace occkit::synth {

namespace {

// Unbiased draw in [0, n). std::uniform_int_distribution is not portable
// across standard libraries, which would break seed reproducibility.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

int uniform_between(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

mask::BinaryMask crop(const mask::BinaryMask& m, const mask::PixelBox& box) {
    mask::BinaryMask out(box.row1 - box.row0 + 1, box.col1 - box.col0 + 1);
    for (int r = box.row0; r <= box.row1; ++r) {
        for (int c = box.col0; c <= box.col1; ++c) {
            if (m.at(r, c)) out.set(r - box.row0, c - box.col0);
        }
    }
    return out;
}

struct Victim {
    const io::AnnotationRecord* ann;
    const io::ImageInfo* image;
};

std::optional<PasteSample> fill_slot(const std::vector<Victim>& victims,
                                     const std::vector<DonorInstance>& donors,
                                     std::uint64_t slot_seed, const SynthConfig& config) {
    std::mt19937_64 rng(slot_seed);
    for (int attempt = 0; attempt < config.max_tries; ++attempt) {
        const Victim& v = victims[uniform_below(rng, victims.size())];
        const DonorInstance& d = donors[uniform_below(rng, donors.size())];
        if (d.annotation_id == v.ann->annotation_id) continue;
        const mask::BinaryMask modal = io::modal_mask(*v.ann, *v.image);
        const auto box = mask::bounding_box(modal);
        if (box.empty()) continue;
        // Any placement whose patch box meets the victim's box.
        const Placement p{uniform_between(rng, box.col0 - d.patch.width() + 1, box.col1),
                          uniform_between(rng, box.row0 - d.patch.height() + 1, box.row1)};
        auto result = paste_occlusion(*v.ann, modal, d, p, slot_seed, config);
        if (auto* sample = std::get_if<PasteSample>(&result)) return std::move(*sample);
    }
    return std::nullopt;
}

}  // namespace

const char* to_string(PasteRejection r) {
    switch (r) {
        case PasteRejection::kEmptyVictim: return "empty victim mask";
        case PasteRejection::kEmptyDonor: return "empty donor mask";
        case PasteRejection::kInsufficientOverlap: return "overlap below min_overlap";
        case PasteRejection::kInsufficientVisible: return "visible area below min_visible";
    }
    return "unknown";
}

mask::BinaryMask place_donor(const mask::BinaryMask& patch, Placement placement, int height,
                             int width) {
    mask::BinaryMask out(height, width);
    for (int r = 0; r < patch.height(); ++r) {
        const int rr = r + placement.y;
        if (rr < 0 || rr >= height) continue;
        for (int c = 0; c < patch.width(); ++c) {
            const int cc = c + placement.x;
            if (cc < 0 || cc >= width) continue;
            if (patch.at(r, c)) out.set(rr, cc);
        }
    }
    return out;
}

std::variant<PasteSample, PasteRejection> paste_occlusion(const io::AnnotationRecord& victim,
                                                          const mask::BinaryMask& victim_modal,
                                                          const DonorInstance& donor,
                                                          Placement placement,
                                                          std::uint64_t seed,
                                                          const SynthConfig& config) {
    const std::size_t victim_area = victim_modal.area();
    if (victim_area == 0) return PasteRejection::kEmptyVictim;
    if (donor.patch.empty()) return PasteRejection::kEmptyDonor;

    const mask::BinaryMask pasted =
        place_donor(donor.patch, placement, victim_modal.height(), victim_modal.width());
    const std::size_t overlap = mask::intersection_area(pasted, victim_modal);
    const double area = static_cast<double>(victim_area);
    if (overlap == 0 || overlap / area < config.min_overlap) {
        return PasteRejection::kInsufficientOverlap;
    }
    const mask::BinaryMask visible = mask::mask_combine(mask::SetOp::kDifference, victim_modal, pasted);
    if (visible.area() / area < config.min_visible) return PasteRejection::kInsufficientVisible;

    PasteSample s;
    s.image_id = victim.image_id;
    s.victim_annotation_id = victim.annotation_id;
    s.donor_annotation_id = donor.annotation_id;
    s.category_id = victim.category_id;
    s.rng_seed = seed;
    s.placement = placement;
    s.visible_mask = mask::rle_encode(visible);
    s.amodal_target = mask::rle_encode(victim_modal);
    s.pasted_mask = mask::rle_encode(pasted);
    return s;
}

mask::BinaryMask prepare_amodal_input(const mask::BinaryMask& modal, int dilation_radius) {
    return mask::dilate(modal, dilation_radius);
}

std::vector<DonorInstance> collect_donors(const io::Dataset& dataset, const SynthConfig& config) {
    std::vector<DonorInstance> donors;
    for (const auto& ann : dataset.annotations()) {
        if (ann.is_crowd) continue;
        const mask::BinaryMask m = io::modal_mask(ann, *dataset.find_image(ann.image_id));
        if (m.area() < std::max<std::size_t>(1, config.min_donor_area)) continue;
        donors.push_back({ann.annotation_id, ann.image_id, crop(m, mask::bounding_box(m))});
    }
    return donors;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t slot) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(seed ^ mix(slot));
}

Corpus generate_corpus(const io::Dataset& dataset, std::size_t count, const SynthConfig& config,
                       std::uint64_t seed) {
    Corpus corpus;
    if (count == 0) return corpus;

    std::vector<Victim> victims;
    for (const auto& ann : dataset.annotations()) {
        if (!ann.is_crowd) victims.push_back({&ann, dataset.find_image(ann.image_id)});
    }
    const auto donors = collect_donors(dataset, config);
    if (victims.empty() || donors.empty()) {
        corpus.exhausted = true;
        return corpus;
    }

    const std::size_t max_slots = count * static_cast<std::size_t>(std::max(1, config.max_slot_factor));
    while (corpus.samples.size() < count && corpus.slots_used < max_slots) {
        const std::size_t batch =
            std::min(count - corpus.samples.size(), max_slots - corpus.slots_used);
        std::vector<std::optional<PasteSample>> results(batch);
        const std::size_t base = corpus.slots_used;
        parallel_for(batch, config.workers, [&](std::size_t i) {
            results[i] = fill_slot(victims, donors, derive_seed(seed, base + i), config);
        });
        for (auto& r : results) {
            if (r && corpus.samples.size() < count) corpus.samples.push_back(std::move(*r));
        }
        corpus.slots_used += batch;
    }
    corpus.exhausted = corpus.samples.size() < count;
    return corpus;
}

io::RasterImage composite(const io::RasterImage& target, const io::RasterImage& donor_pixels,
                          const mask::BinaryMask& patch, Placement placement) {
    if (donor_pixels.height != patch.height() || donor_pixels.width != patch.width() ||
        donor_pixels.channels != target.channels) {
        throw ValidationError("composite: donor pixels must match the patch size and channels");
    }
    io::RasterImage out = target;
    for (int r = 0; r < patch.height(); ++r) {
        const int rr = r + placement.y;
        if (rr < 0 || rr >= out.height) continue;
        for (int c = 0; c < patch.width(); ++c) {
            const int cc = c + placement.x;
            if (cc < 0 || cc >= out.width || !patch.at(r, c)) continue;
            for (int ch = 0; ch < out.channels; ++ch) {
                out.samples[(static_cast<std::size_t>(rr) * out.width + cc) * out.channels + ch] =
                    donor_pixels.at(r, c, ch);
            }
        }
    }
    return out;
}

std::string format_samples(const io::Dataset& dataset, const std::vector<PasteSample>& samples) {
    std::set<Id> used_images;
    for (const auto& s : samples) used_images.insert(s.image_id);
    io::Json images = io::Json::array();
    for (const auto& im : dataset.images()) {
        if (used_images.contains(im.id)) images.push_back(io::image_to_json(im));
    }
    io::Json cats = io::Json::array();
    for (const auto& c : dataset.categories()) cats.push_back(io::category_to_json(c));

    io::Json anns = io::Json::array();
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        const io::BBox box = io::bbox_of(mask::rle_decode(s.visible_mask));
        anns.push_back({{"id", static_cast<Id>(k + 1)},
                        {"image_id", s.image_id},
                        {"category_id", s.category_id},
                        {"segmentation", io::rle_to_json(s.visible_mask)},
                        {"bbox", {box.x, box.y, box.w, box.h}},
                        {"iscrowd", 0},
                        {"visible_rle", io::rle_to_json(s.visible_mask)},
                        {"amodal_rle", io::rle_to_json(s.amodal_target)},
                        {"pasted_rle", io::rle_to_json(s.pasted_mask)},
                        {"victim_annotation_id", s.victim_annotation_id},
                        {"donor_annotation_id", s.donor_annotation_id},
                        {"rng_seed", s.rng_seed},
                        {"placement", {s.placement.x, s.placement.y}}});
    }
    return io::canonical_dump({{"images", images}, {"annotations", anns}, {"categories", cats}});
}

std::vector<PasteSample> parse_samples(const std::string& text) {
    std::vector<PasteSample> out;
    try {
        const io::Json root = io::Json::parse(text);
        for (const auto& a : root.at("annotations")) {
            const std::string ctx = "sample " + std::to_string(a.at("id").get<Id>());
            PasteSample s;
            s.image_id = a.at("image_id").get<Id>();
            s.category_id = a.at("category_id").get<Id>();
            s.victim_annotation_id = a.at("victim_annotation_id").get<Id>();
            s.donor_annotation_id = a.at("donor_annotation_id").get<Id>();
            s.rng_seed = a.at("rng_seed").get<std::uint64_t>();
            s.placement = {a.at("placement").at(0).get<int>(), a.at("placement").at(1).get<int>()};
            s.visible_mask = io::rle_from_json(a.at("visible_rle"), ctx);
            s.amodal_target = io::rle_from_json(a.at("amodal_rle"), ctx);
            s.pasted_mask = io::rle_from_json(a.at("pasted_rle"), ctx);
            out.push_back(std::move(s));
        }
    } catch (const io::Json::exception& e) {
        throw ParseError(std::string("synth samples: ") + e.what());
    }
    return out;
}

}  // namespace occkit::synth
