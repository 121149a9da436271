#include "doctest.h"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

#include "occkit/json_codec.hpp"
#include "occkit/synth.hpp"

using namespace occkit;
using namespace occkit::synth;

namespace {

io::AnnotationRecord victim_record() {
    io::AnnotationRecord a;
    a.annotation_id = 1;
    a.image_id = 1;
    a.category_id = 3;
    return a;
}

mask::BinaryMask square(int h, int w, int r0, int c0, int size) {
    mask::BinaryMask m(h, w);
    for (int r = r0; r < r0 + size; ++r) {
        for (int c = c0; c < c0 + size; ++c) m.set(r, c);
    }
    return m;
}

// Several overlapping and separate boxes over three images.
io::Dataset corpus_dataset() {
    std::mt19937 rng(3);
    std::vector<io::ImageInfo> images;
    std::vector<io::AnnotationRecord> anns;
    io::Id id = 1;
    for (io::Id img = 1; img <= 3; ++img) {
        images.push_back({img, 48, 48, "img" + std::to_string(img) + ".png"});
        for (int k = 0; k < 4; ++k) {
            const int size = 8 + static_cast<int>(rng() % 16);
            const auto m = square(48, 48, static_cast<int>(rng() % (48 - size)),
                                  static_cast<int>(rng() % (48 - size)), size);
            io::AnnotationRecord a;
            a.annotation_id = id++;
            a.image_id = img;
            a.category_id = 1;
            a.modal = mask::rle_encode(m);
            a.bbox = io::bbox_of(m);
            anns.push_back(a);
        }
    }
    return io::Dataset(images, anns, {{1, "box", ""}});
}

SynthConfig small_donors() {
    SynthConfig cfg;
    cfg.min_donor_area = 16;
    return cfg;
}

void check_sample(const PasteSample& s, const SynthConfig& cfg) {
    const auto visible = mask::rle_decode(s.visible_mask);
    const auto amodal = mask::rle_decode(s.amodal_target);
    const auto pasted = mask::rle_decode(s.pasted_mask);
    CHECK(visible == mask::mask_combine(mask::SetOp::kDifference, amodal, pasted));
    CHECK(mask::is_subset(visible, amodal));
    CHECK(mask::mask_combine(mask::SetOp::kUnion, visible,
                             mask::mask_combine(mask::SetOp::kIntersection, amodal, pasted)) == amodal);
    // Constraints re-checked by counting.
    std::size_t overlap = 0, area = 0, vis = 0;
    for (int r = 0; r < amodal.height(); ++r) {
        for (int c = 0; c < amodal.width(); ++c) {
            area += amodal.at(r, c);
            overlap += amodal.at(r, c) && pasted.at(r, c);
            vis += amodal.at(r, c) && !pasted.at(r, c);
        }
    }
    CHECK(overlap > 0);
    CHECK(static_cast<double>(overlap) / area >= cfg.min_overlap);
    CHECK(static_cast<double>(vis) / area >= cfg.min_visible);
}

}  // namespace

TEST_CASE("paste_occlusion: rejections") {
    const auto victim = square(20, 20, 5, 5, 10);
    const DonorInstance donor{2, 1, mask::BinaryMask::filled(4, 4)};
    const SynthConfig cfg;

    auto r = paste_occlusion(victim_record(), victim, donor, {0, 0}, 1, cfg);
    REQUIRE(std::holds_alternative<PasteRejection>(r));
    CHECK(std::get<PasteRejection>(r) == PasteRejection::kInsufficientOverlap);

    const DonorInstance cover{2, 1, mask::BinaryMask::filled(12, 12)};
    SynthConfig strict;
    strict.min_visible = 0.1;
    r = paste_occlusion(victim_record(), victim, cover, {4, 4}, 1, strict);
    CHECK(std::get<PasteRejection>(r) == PasteRejection::kInsufficientVisible);

    r = paste_occlusion(victim_record(), mask::BinaryMask(20, 20), donor, {5, 5}, 1, cfg);
    CHECK(std::get<PasteRejection>(r) == PasteRejection::kEmptyVictim);
    r = paste_occlusion(victim_record(), victim, {2, 1, mask::BinaryMask(3, 3)}, {5, 5}, 1, cfg);
    CHECK(std::get<PasteRejection>(r) == PasteRejection::kEmptyDonor);

    SynthConfig zero;
    zero.min_overlap = 0.0;
    r = paste_occlusion(victim_record(), victim, donor, {0, 0}, 1, zero);
    CHECK(std::get<PasteRejection>(r) == PasteRejection::kInsufficientOverlap);
}

TEST_CASE("paste_occlusion: 4x4 donor over the corner of a 10x10 victim") {
    const auto victim = square(16, 16, 2, 2, 10);
    const DonorInstance donor{2, 1, mask::BinaryMask::filled(4, 4)};
    // Shifted so 3x3 of the donor overlaps the victim's top-left corner.
    const auto r = paste_occlusion(victim_record(), victim, donor, {1, 1}, 77, {});
    REQUIRE(std::holds_alternative<PasteSample>(r));
    const auto& s = std::get<PasteSample>(r);
    const auto visible = mask::rle_decode(s.visible_mask);
    CHECK(visible.area() == 100 - 9);
    for (int row = 0; row < 16; ++row) {
        for (int col = 0; col < 16; ++col) {
            const bool in_victim = row >= 2 && row < 12 && col >= 2 && col < 12;
            const bool in_donor = row >= 1 && row < 5 && col >= 1 && col < 5;
            CHECK(visible.at(row, col) == (in_victim && !in_donor));
        }
    }
    CHECK(s.rng_seed == 77);
    CHECK(s.category_id == 3);
    CHECK(mask::rle_decode(s.amodal_target) == victim);
    check_sample(s, {});
}

TEST_CASE("prepare_amodal_input") {
    const auto m = square(8, 8, 3, 3, 2);
    CHECK(prepare_amodal_input(m, 0) == m);
    CHECK(prepare_amodal_input(m, 1) == square(8, 8, 2, 2, 4));
}

TEST_CASE("collect_donors filters by area and crowd") {
    const auto ds = corpus_dataset();
    SynthConfig cfg;
    cfg.min_donor_area = 200;
    for (const auto& d : collect_donors(ds, cfg)) {
        CHECK(d.patch.area() >= 200);
        const auto box = mask::bounding_box(d.patch);
        CHECK(box.row0 == 0);
        CHECK(box.col0 == 0);
    }
    cfg.min_donor_area = 1u << 30;
    CHECK(collect_donors(ds, cfg).empty());
}

TEST_CASE("generate_corpus: count zero, determinism, seed sensitivity, invariants") {
    const auto ds = corpus_dataset();
    const auto cfg = small_donors();
    CHECK(generate_corpus(ds, 0, cfg, 1).samples.empty());

    const auto a = generate_corpus(ds, 100, cfg, 12345);
    const auto b = generate_corpus(ds, 100, cfg, 12345);
    CHECK(a.samples == b.samples);
    CHECK(format_samples(ds, a.samples) == format_samples(ds, b.samples));
    REQUIRE(a.samples.size() == 100);

    const auto c = generate_corpus(ds, 100, cfg, 54321);
    std::size_t differing = 0;
    for (std::size_t k = 0; k < 100; ++k) {
        differing += !(a.samples[k].placement == c.samples[k].placement);
    }
    CHECK(differing > 50);

    for (const auto& s : a.samples) {
        check_sample(s, cfg);
        CHECK(s.victim_annotation_id != s.donor_annotation_id);
    }

    SynthConfig parallel = cfg;
    parallel.workers = 6;
    CHECK(generate_corpus(ds, 100, parallel, 12345).samples == a.samples);
}

TEST_CASE("generate_corpus: exhaustion is reported") {
    const auto ds = corpus_dataset();
    SynthConfig cfg = small_donors();
    cfg.min_overlap = 1.0;
    cfg.min_visible = 1.0;
    const auto c = generate_corpus(ds, 5, cfg, 1);
    CHECK(c.samples.empty());
    CHECK(c.exhausted);
    CHECK(c.slots_used == 5u * cfg.max_slot_factor);
}

TEST_CASE("samples file roundtrip") {
    const auto ds = corpus_dataset();
    const auto c = generate_corpus(ds, 10, small_donors(), 8);
    const auto text = format_samples(ds, c.samples);
    CHECK(parse_samples(text) == c.samples);
    const auto j = io::Json::parse(text);
    CHECK(j["annotations"][0].contains("visible_rle"));
    CHECK(j["annotations"][0].contains("amodal_rle"));
    CHECK(j["annotations"][0].contains("pasted_rle"));
}

TEST_CASE("composite copies donor pixels under the patch only") {
    io::RasterImage target{4, 4, 1, 8, std::vector<std::uint16_t>(16, 0)};
    io::RasterImage donor{2, 2, 1, 8, {9, 9, 9, 9}};
    const auto patch = testing::mask_from_rows({"#.", "##"});
    const auto out = composite(target, donor, patch, {1, 2});
    CHECK(out.at(2, 1) == 9);
    CHECK(out.at(2, 2) == 0);
    CHECK(out.at(3, 1) == 9);
    CHECK(out.at(3, 2) == 9);
    CHECK(out.at(0, 0) == 0);
    CHECK_THROWS_AS(composite(target, {1, 1, 1, 8, {1}}, patch, {0, 0}), ValidationError);
}

TEST_CASE("derive_seed separates slots and seeds") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}
