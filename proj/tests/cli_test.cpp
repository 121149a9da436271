#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "support/scene_files.hpp"
#include "support/tempdir.hpp"

#include "occkit/cli.hpp"
#include "occkit/splits.hpp"

using namespace occkit;
using occkit::testing::TempDir;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string s(const std::filesystem::path& p) { return p.string(); }

}  // namespace

TEST_CASE("reason, split and stats on the three-object fixture") {
    TempDir dir;
    testing::write_scene_inputs(dir.path(), {testing::three_object_scene()});
    const auto reason = run({"reason", "--annotations", s(dir / "annotations.json"), "--depth-dir",
                             s(dir / "depth"), "--output", s(dir / "out")});
    REQUIRE_MESSAGE(reason.code == 0, reason.err);
    CHECK(std::filesystem::exists(dir / "out" / "trilayer.json"));
    CHECK(std::filesystem::exists(dir / "out" / "reason.manifest.json"));

    const auto stats = run({"stats", "--trilayer", s(dir / "out" / "trilayer.json")});
    REQUIRE(stats.code == 0);
    CHECK(stats.out.find("Separated        |              1") != std::string::npos);
    CHECK(stats.out.find("Occluded         |              1") != std::string::npos);

    const auto split = run({"split", "--trilayer", s(dir / "out" / "trilayer.json"), "--output",
                            s(dir / "split")});
    REQUIRE(split.code == 0);
    CHECK(splits::load_manifest(dir / "split" / "separated.json").member_ids == std::vector<io::Id>{1});
    CHECK(splits::load_manifest(dir / "split" / "occluded.json").member_ids == std::vector<io::Id>{2});

    // Re-running overwrites with identical bytes.
    const std::string first = testing::slurp(dir / "out" / "trilayer.json");
    const std::string manifest = testing::slurp(dir / "out" / "reason.manifest.json");
    REQUIRE(run({"reason", "--annotations", s(dir / "annotations.json"), "--depth-dir",
                 s(dir / "depth"), "--output", s(dir / "out"), "--workers", "4"})
                .code == 0);
    CHECK(testing::slurp(dir / "out" / "trilayer.json") == first);
    CHECK(testing::slurp(dir / "out" / "reason.manifest.json") == manifest);
}

TEST_CASE("eval with an empty detections file reports zero recall") {
    TempDir dir;
    testing::write_scene_inputs(dir.path(), {testing::three_object_scene()});
    REQUIRE(run({"reason", "--annotations", s(dir / "annotations.json"), "--depth-dir",
                 s(dir / "depth"), "--output", s(dir / "out")})
                .code == 0);
    REQUIRE(run({"split", "--trilayer", s(dir / "out" / "trilayer.json"), "--output", s(dir / "out")})
                .code == 0);
    io::write_text_file(dir / "dets.json", "[]");
    const auto ev = run({"eval", "--annotations", s(dir / "annotations.json"), "--manifest",
                         s(dir / "out" / "occluded.json"), "--detections", s(dir / "dets.json"),
                         "--output", s(dir / "report")});
    REQUIRE_MESSAGE(ev.code == 0, ev.err);
    CHECK(ev.out.find("0(0.00%)") != std::string::npos);
    const auto j = io::Json::parse(testing::slurp(dir / "report" / "recall_occluded.json"));
    CHECK(j["recalled"] == 0);
    CHECK(j["total"] == 1);
}

TEST_CASE("configuration errors exit with 2 and write nothing") {
    TempDir dir;
    const auto missing = run({"reason", "--annotations", s(dir / "nope.json"), "--no-require-depth",
                              "--output", s(dir / "out")});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("error[config]") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "out"));

    CHECK(run({"reason", "--output", s(dir / "out")}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"stats", "--trilayer", s(dir / "x.json"), "--bogus"}).code == 2);
    CHECK(run({}).code == 2);

    testing::write_scene_inputs(dir.path(), {testing::three_object_scene()});
    const auto no_depth = run({"reason", "--annotations", s(dir / "annotations.json"), "--output",
                               s(dir / "out")});
    CHECK(no_depth.code == 2);
    CHECK_FALSE(std::filesystem::exists(dir / "out"));
    CHECK(run({"reason", "--annotations", s(dir / "annotations.json"), "--depth-dir",
               s(dir / "depth"), "--output", s(dir / "out"), "--contact-radius", "-1"})
              .code == 2);
}

TEST_CASE("parse errors exit with 1") {
    TempDir dir;
    io::write_text_file(dir / "broken.json", "{not json");
    const auto r = run({"reason", "--annotations", s(dir / "broken.json"), "--no-require-depth",
                        "--output", s(dir / "out")});
    CHECK(r.code == 1);
    CHECK(r.err.find("error[parse]") != std::string::npos);
}

TEST_CASE("config file supplies defaults and flags override it") {
    TempDir dir;
    testing::write_scene_inputs(dir.path(), {testing::three_object_scene()});
    REQUIRE(run({"reason", "--annotations", s(dir / "annotations.json"), "--depth-dir",
                 s(dir / "depth"), "--output", s(dir / "out")})
                .code == 0);
    io::write_text_file(dir / "cfg.toml", "[stats]\ntrilayer = \"" + s(dir / "out" / "trilayer.json") +
                                               "\"\nconnectivity = 4\n");
    const auto from_file = run({"stats", "--config", s(dir / "cfg.toml")});
    REQUIRE_MESSAGE(from_file.code == 0, from_file.err);
    CHECK(from_file.out.find("Separated") != std::string::npos);
    CHECK(run({"stats", "--config", s(dir / "cfg.toml"), "--connectivity", "5"}).code == 2);
}

TEST_CASE("synth writes samples and a run manifest") {
    TempDir dir;
    std::mt19937 rng(5);
    testing::write_scene_inputs(dir.path(), {testing::random_scene(rng, 40, 40), testing::three_object_scene()});
    const auto r = run({"synth", "--annotations", s(dir / "annotations.json"), "--output",
                        s(dir / "syn"), "--count", "5", "--seed", "9", "--min-donor-area", "16"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto j = io::Json::parse(testing::slurp(dir / "syn" / "synth_samples.json"));
    CHECK(j["annotations"].size() <= 5);
    CHECK(std::filesystem::exists(dir / "syn" / "synth.manifest.json"));
}
