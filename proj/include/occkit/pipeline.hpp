#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "occkit/depth.hpp"
#include "occkit/evaluator.hpp"
#include "occkit/occlusion.hpp"
#include "occkit/splits.hpp"
#include "occkit/synth.hpp"

namespace occkit::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";

// Output file names inside --output.
inline constexpr const char* kTrilayerFile = "trilayer.json";
inline constexpr const char* kRelationsFile = "relations.json";
inline constexpr const char* kSeparatedFile = "separated.json";
inline constexpr const char* kOccludedFile = "occluded.json";
inline constexpr const char* kStatsFile = "split_stats.txt";
inline constexpr const char* kSamplesFile = "synth_samples.json";

struct ReasonOptions {
    fs::path annotations;
    std::optional<fs::path> amodal;
    std::optional<fs::path> depth_dir;
    io::DepthConvention depth_convention = io::DepthConvention::kLargerIsFarther;
    double depth_scale = 1.0;
    bool resize_depth = false;
    fs::path output_dir;
    occlusion::ReasonerConfig reasoner;
    int workers = 1;
};

struct SplitOptions {
    fs::path trilayer;
    fs::path output_dir;
    splits::SplitConfig split;
};

struct SynthOptions {
    fs::path annotations;
    fs::path output_dir;
    std::size_t count = 100;
    std::uint64_t seed = 0;
    synth::SynthConfig synth;
    /// When set, composited PNGs are written for samples whose source
    /// images exist here as PNG files.
    std::optional<fs::path> images_dir;
};

enum class EvalProtocol { kRecall, kGtBoxMiou, kAmodalMiou };

struct EvalOptions {
    EvalProtocol protocol = EvalProtocol::kRecall;
    fs::path annotations;
    std::vector<fs::path> manifests;
    std::optional<fs::path> detections;
    std::optional<fs::path> predictions;
    std::optional<fs::path> source;
    std::optional<fs::path> category_map;
    std::optional<fs::path> target_categories;
    std::optional<fs::path> output_dir;
    eval::RecallConfig recall;
};

struct StatsOptions {
    fs::path trilayer;
    splits::SplitConfig split;
};

/// Checks inputs exist and parameters are in range. Throws ConfigError.
void validate(const ReasonOptions& o);
void validate(const SplitOptions& o);
void validate(const SynthOptions& o);
void validate(const EvalOptions& o);
void validate(const StatsOptions& o);

/// Each runner validates, then writes its outputs plus a
/// `<command>.manifest.json` provenance file, and prints a summary.
void run_reason(const ReasonOptions& o, std::ostream& log);
void run_split(const SplitOptions& o, std::ostream& log);
void run_synth(const SynthOptions& o, std::ostream& log);
void run_eval(const EvalOptions& o, std::ostream& out);
void run_stats(const StatsOptions& o, std::ostream& out);

/// Depth file for an image: <stem of file_name>.png, else <id>.png.
std::optional<fs::path> depth_path_for(const fs::path& depth_dir, const io::ImageInfo& image);

/// {annotation_id -> mask} from an array of {"annotation_id", "segmentation"}.
std::map<io::Id, mask::RleMask> load_mask_predictions(const fs::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

}  // namespace occkit::pipeline
