#include "doctest.h"
#include "support/eval_fixtures.hpp"
#include "support/oracles.hpp"

#include <set>

#include "occkit/evaluator.hpp"
#include "occkit/json_codec.hpp"

using namespace occkit;
using namespace occkit::eval;
using occkit::testing::mask_from_rows;

namespace {

io::AnnotationRecord record(Id id, Id image, Id cat, const mask::BinaryMask& m,
                            std::optional<mask::BinaryMask> amodal = std::nullopt) {
    io::AnnotationRecord a;
    a.annotation_id = id;
    a.image_id = image;
    a.category_id = cat;
    a.modal = mask::rle_encode(m);
    if (amodal) a.amodal = mask::rle_encode(*amodal);
    a.bbox = io::bbox_of(m);
    return a;
}

io::DetectionRecord detection(Id image, Id cat, double score, const mask::BinaryMask& m) {
    return {image, cat, score, mask::rle_encode(m)};
}

splits::SplitManifest manifest_of(std::vector<Id> ids) {
    splits::SplitManifest m;
    m.split_name = "occluded";
    m.total = ids.size();
    m.member_ids = std::move(ids);
    return m;
}

// Four-pixel object; the detection covers three of its pixels (IoU 0.75).
struct Boundary {
    io::Dataset gt;
    mask::BinaryMask truth, three_quarters;
};

Boundary boundary_fixture() {
    const auto truth = mask_from_rows({"##..", "##..", "...."});
    const auto part = mask_from_rows({"##..", "#...", "...."});
    return {io::Dataset({{1, 4, 3, ""}}, {record(1, 1, 1, truth)}, {{1, "a", ""}}), truth, part};
}

}  // namespace

TEST_CASE("format_percent reproduces the published pairs") {
    CHECK(format_percent(3264, 5550) == "58.81");
    CHECK(format_percent(1125, 3522) == "31.94");
    CHECK(format_percent(3441, 5550) == "62.00");
    CHECK(format_percent(1223, 3522) == "34.72");
    CHECK(format_count_percent(3264, 5550) == "3264(58.81%)");
    CHECK(format_percent(0, 0) == "0.00");
    CHECK(format_percent(7, 7) == "100.00");
    CHECK(format_percent(1, 8) == "12.50");
    CHECK(format_percent(1, 3) == "33.33");
    CHECK(format_percent(2, 3) == "66.67");
}

TEST_CASE("format_percent agrees with a decimal rounding oracle") {
    for (std::size_t total = 1; total <= 300; ++total) {
        for (std::size_t r = 0; r <= total; ++r) {
            // Round half up on exact rational 10000*r/total.
            const std::size_t num = 10000 * r, q = num / total, rem = num % total;
            const std::size_t h = 2 * rem >= total ? q + 1 : q;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%zu.%02zu", h / 100, h % 100);
            CHECK(format_percent(r, total) == buf);
        }
    }
}

TEST_CASE("eval_recall: simple hit and strict boundaries") {
    const auto b = boundary_fixture();
    const auto m = manifest_of({1});

    std::vector dets{detection(1, 1, 0.31, b.truth)};
    auto rep = eval_recall(m, b.gt, dets);
    CHECK(rep.recalled == 1);
    CHECK(rep.percent == "100.00");

    dets = {detection(1, 1, 0.30, b.truth)};
    CHECK(eval_recall(m, b.gt, dets).recalled == 0);

    dets = {detection(1, 1, 0.9, b.three_quarters)};
    rep = eval_recall(m, b.gt, dets);
    CHECK(rep.recalled == 0);
    CHECK(rep.per_object[0].best_iou == 0.75);

    dets = {detection(1, 2, 0.9, b.truth)};
    CHECK(eval_recall(m, b.gt, dets).recalled == 0);
    CHECK(eval_recall(m, b.gt, dets, {0.3, 0.75, false}).recalled == 1);

    dets = {detection(2, 1, 0.9, b.truth)};
    CHECK(eval_recall(m, b.gt, dets).recalled == 0);
}

TEST_CASE("eval_recall: empty manifest and unknown members") {
    const auto b = boundary_fixture();
    const auto rep = eval_recall(manifest_of({}), b.gt, {});
    CHECK(rep.total == 0);
    CHECK(rep.percent == "0.00");
    CHECK_THROWS_AS(eval_recall(manifest_of({9}), b.gt, {}), ValidationError);
    CHECK_THROWS_AS(eval_recall(manifest_of({1}), b.gt, {}, {1.5, 0.75, true}), ValidationError);
}

TEST_CASE("eval_recall agrees with the all-pairs oracle and is monotone") {
    std::mt19937 rng(57);
    for (int i = 0; i < 200; ++i) {
        auto f = testing::random_recall_fixture(rng);
        for (bool cat : {true, false}) {
            const RecallConfig cfg{0.3, 0.75, cat};
            const auto rep = eval_recall(f.manifest, f.gt, f.detections, cfg);
            CHECK(rep.recalled ==
                  testing::brute_force_recall(f.manifest.member_ids, f.gt, f.detections, 0.3, 0.75, cat));
            CHECK(rep.recalled <= rep.total);

            const auto looser = eval_recall(f.manifest, f.gt, f.detections, {0.1, 0.5, cat});
            CHECK(looser.recalled >= rep.recalled);
            if (!f.detections.empty()) {
                auto fewer = f.detections;
                fewer.pop_back();
                CHECK(eval_recall(f.manifest, f.gt, fewer, cfg).recalled <= rep.recalled);
            }
        }
    }
}

TEST_CASE("eval_miou_gtbox") {
    const auto a = mask_from_rows({"##", ".."});
    const auto b = mask_from_rows({"..", "##"});
    const std::vector gt{a, b};
    const std::vector<std::optional<mask::BinaryMask>> perfect{a, b};
    CHECK(eval_miou_gtbox(gt, perfect) == 100.0);
    const std::vector<std::optional<mask::BinaryMask>> half{a, std::nullopt};
    CHECK(eval_miou_gtbox(gt, half) == 50.0);

    // IoUs 1.0, 0.5, 0.0.
    const auto c = mask_from_rows({"#.", "#."});
    const std::vector gt3{a, a, a};
    const std::vector<std::optional<mask::BinaryMask>> p3{a, mask_from_rows({"#.", ".."}), b};
    CHECK(format_miou(eval_miou_gtbox(gt3, p3)) == "50.0");
    CHECK(mask::mask_iou(a, c) == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(eval_miou_gtbox({}, {}), ValidationError);
}

TEST_CASE("shipped KINS mapping matches the published table") {
    const auto m = load_category_mapping(std::string(OCCKIT_DATA_DIR) + "/kins_to_coco.json");
    REQUIRE(m.source_to_target.size() == 8);
    const std::map<Id, std::optional<std::string>> expected{
        {1, "person"}, {2, "person"}, {3, "person"}, {4, "car"},
        {5, "train"},  {6, "truck"},  {7, "truck"},  {8, std::nullopt}};
    CHECK(m.source_to_target == expected);
    CHECK(m.source_names.at(3) == "rider");
    CHECK(m.source_names.at(5) == "tram");
    CHECK(m.source_names.at(8) == "misc");
}

TEST_CASE("map_categories remaps and drops unmapped objects") {
    const auto m = load_category_mapping(std::string(OCCKIT_DATA_DIR) + "/kins_to_coco.json");
    const auto px = mask_from_rows({"#."});
    const io::Dataset kins({{1, 2, 1, ""}},
                           {record(1, 1, 3, px), record(2, 1, 5, px), record(3, 1, 8, px)}, {});
    const std::vector<io::Category> coco{{1, "person", ""}, {3, "car", ""}, {7, "train", ""}, {8, "truck", ""}};
    const auto out = map_categories(m, kins, coco);
    REQUIRE(out.annotations().size() == 2);
    CHECK(out.find_annotation(1)->category_id == 1);
    CHECK(out.find_annotation(2)->category_id == 7);
    CHECK_FALSE(out.find_annotation(3));

    const io::Dataset unknown({{1, 2, 1, ""}}, {record(1, 1, 42, px)}, {});
    CHECK_THROWS_AS(map_categories(m, unknown, coco), ValidationError);
}

TEST_CASE("transfer_amodal_gt: identity, strict threshold, greedy best") {
    // 10x10 target square; sources cover a fraction of it.
    auto square = [](int rows) {
        mask::BinaryMask m(12, 12);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < 10; ++c) m.set(r, c);
        }
        return m;
    };
    auto partial = [](int pixels) {
        mask::BinaryMask m(12, 12);
        for (int k = 0; k < pixels; ++k) m.set(k / 10, k % 10);
        return m;
    };
    const auto full = square(10);
    const io::Dataset target({{1, 12, 12, ""}}, {record(100, 1, 1, full)}, {});

    auto source_with = [&](std::vector<std::pair<Id, mask::BinaryMask>> items) {
        std::vector<io::AnnotationRecord> anns;
        for (auto& [id, m] : items) anns.push_back(record(id, 1, 1, m, m));
        return io::Dataset({{1, 12, 12, ""}}, anns, {});
    };

    auto same = transfer_amodal_gt(source_with({{1, full}}), target);
    REQUIRE(same.size() == 1);
    CHECK(same[0].iou == 1.0);

    CHECK(transfer_amodal_gt(source_with({{1, partial(71)}}), target).size() == 1);
    CHECK(transfer_amodal_gt(source_with({{1, partial(69)}}), target).empty());
    CHECK(transfer_amodal_gt(source_with({{1, partial(70)}}), target).empty());

    const auto two = transfer_amodal_gt(source_with({{1, partial(80)}, {2, partial(90)}}), target);
    REQUIRE(two.size() == 1);
    CHECK(two[0].source_id == 2);
    CHECK(two[0].iou == doctest::Approx(0.9));

    // A source without an amodal mask is not a candidate.
    const io::Dataset modal_only({{1, 12, 12, ""}}, {record(1, 1, 1, full)}, {});
    CHECK(transfer_amodal_gt(modal_only, target).empty());
}

TEST_CASE("transfer_amodal_gt is one-to-one above the threshold on random fixtures") {
    std::mt19937 rng(71);
    for (int i = 0; i < 50; ++i) {
        auto f = testing::random_recall_fixture(rng);
        std::vector<io::AnnotationRecord> src;
        for (const auto& a : f.gt.annotations()) {
            auto copy = a;
            copy.annotation_id += 1000;
            copy.amodal = std::get<mask::RleMask>(a.modal);
            src.push_back(copy);
        }
        const io::Dataset source(f.gt.images(), src, {});
        const auto matches = transfer_amodal_gt(source, f.gt);
        std::set<Id> t, s;
        for (const auto& m : matches) {
            CHECK(m.iou > 0.7);
            CHECK(t.insert(m.target_id).second);
            CHECK(s.insert(m.source_id).second);
        }
    }
}

TEST_CASE("eval_amodal_completion") {
    // Amodal 10 pixels; modal covers 6 of them.
    const auto amodal = mask_from_rows({"#####", "#####"});
    const auto modal = mask_from_rows({"###..", "###.."});
    const io::Dataset source({{1, 5, 2, ""}}, {record(1, 1, 1, modal, amodal)}, {});
    const std::vector<AmodalMatch> matches{{50, 1, 1.0}};
    CHECK(eval_amodal_completion(matches, source, {{50, amodal}}) == 100.0);
    CHECK(eval_amodal_completion(matches, source, {{50, modal}}) == doctest::Approx(60.0));
    CHECK(eval_amodal_completion(matches, source, {}) == 0.0);
    CHECK_THROWS_AS(eval_amodal_completion({}, source, {}), ValidationError);
}

TEST_CASE("recall table and JSON report") {
    RecallReport r{"occluded", 3264, 5550, "58.81", {}};
    const std::vector reports{r};
    CHECK(format_recall_table(reports).find("3264(58.81%)") != std::string::npos);
    const auto j = io::Json::parse(recall_report_json(r, {}));
    CHECK(j["percent"] == "58.81");
}
