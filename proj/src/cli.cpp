#include "occkit/cli.hpp"

#include <iostream>

#include "CLI11.hpp"
#include "occkit/pipeline.hpp"

namespace occkit::cli {

namespace {

namespace fs = std::filesystem;

struct Args {
    pipeline::ReasonOptions reason;
    pipeline::SplitOptions split;
    pipeline::SynthOptions synth;
    pipeline::EvalOptions eval;
    pipeline::StatsOptions stats;

    std::string amodal, depth_dir, depth_convention = "larger-is-farther";
    std::string detections, predictions, source, category_map, target_categories, eval_output;
    std::string images_dir;
    std::string protocol = "recall";
    int split_connectivity = 8;
    int stats_connectivity = 8;
};

void add_split_flags(CLI::App* cmd, splits::SplitConfig& cfg, int& connectivity) {
    cmd->add_option("--connectivity", connectivity, "Pixel adjacency for piece counting (4 or 8)")
        ->capture_default_str();
    cmd->add_option("--min-piece-area", cfg.min_piece_area,
                    "Ignore connected pieces smaller than this many pixels")
        ->capture_default_str();
    cmd->add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
}

std::optional<fs::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
}

mask::Connectivity to_connectivity(int c) {
    if (c == 4) return mask::Connectivity::kFour;
    if (c == 8) return mask::Connectivity::kEight;
    throw ConfigError("--connectivity must be 4 or 8, got " + std::to_string(c));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"occkit: occlusion annotation, split construction and recall evaluation", "occkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML config file; flags override its values")
        ->envname(kConfigEnv);
    app.set_version_flag("--version", pipeline::kToolVersion);

    Args a;

    auto* reason = app.add_subcommand("reason", "Infer occlusion order and write tri-layer targets");
    reason->add_option("--annotations", a.reason.annotations, "COCO annotation file");
    reason->add_option("--amodal", a.amodal, "Amodal sidecar JSON");
    reason->add_option("--depth-dir", a.depth_dir, "Directory of single-channel depth PNGs");
    reason->add_option("--depth-convention", a.depth_convention,
                       "larger-is-farther or larger-is-nearer")
        ->capture_default_str();
    reason->add_option("--depth-scale", a.reason.depth_scale, "Multiplier applied to raw depth")
        ->capture_default_str();
    reason->add_flag("--resize-depth", a.reason.resize_depth,
                     "Resample depth maps whose size differs from the image");
    reason->add_option("--output", a.reason.output_dir, "Output directory");
    reason->add_option("--contact-radius", a.reason.reasoner.contact_radius,
                       "Dilation radius for the contact test")
        ->capture_default_str();
    reason->add_flag("--require-depth,!--no-require-depth", a.reason.reasoner.require_depth,
                     "Verify intersection verdicts with mean depth");
    reason->add_option("--workers", a.reason.workers, "Worker threads")->capture_default_str();

    auto* split = app.add_subcommand("split", "Build the Separated and Occluded manifests");
    split->add_option("--trilayer", a.split.trilayer, "Tri-layer file written by `reason`");
    split->add_option("--output", a.split.output_dir, "Output directory");
    add_split_flags(split, a.split.split, a.split_connectivity);

    auto* synth = app.add_subcommand("synth", "Generate artificial-occlusion training pairs");
    synth->add_option("--annotations", a.synth.annotations, "COCO annotation file");
    synth->add_option("--output", a.synth.output_dir, "Output directory");
    synth->add_option("--count", a.synth.count, "Number of samples")->capture_default_str();
    synth->add_option("--seed", a.synth.seed, "Corpus seed")->capture_default_str();
    synth->add_option("--min-overlap", a.synth.synth.min_overlap,
                      "Minimum pasted fraction of the victim's area")
        ->capture_default_str();
    synth->add_option("--min-visible", a.synth.synth.min_visible,
                      "Minimum visible fraction of the victim's area")
        ->capture_default_str();
    synth->add_option("--min-donor-area", a.synth.synth.min_donor_area, "Minimum donor area (px)")
        ->capture_default_str();
    synth->add_option("--max-tries", a.synth.synth.max_tries, "Placement attempts per slot")
        ->capture_default_str();
    synth->add_option("--images-dir", a.images_dir, "PNG images for optional compositing");
    synth->add_option("--workers", a.synth.synth.workers, "Worker threads")->capture_default_str();

    auto* ev = app.add_subcommand("eval", "Score detections or mask predictions");
    ev->add_option("--protocol", a.protocol, "recall, gtbox-miou or amodal-miou")
        ->capture_default_str();
    ev->add_option("--annotations", a.eval.annotations, "Ground-truth COCO (or tri-layer) file");
    ev->add_option("--manifest", a.eval.manifests, "Split manifest(s) for recall");
    ev->add_option("--detections", a.detections, "COCO results file");
    ev->add_option("--predictions", a.predictions, "Per-annotation mask predictions");
    ev->add_option("--source", a.source, "Annotations carrying amodal ground truth");
    ev->add_option("--category-map", a.category_map, "Category mapping data file");
    ev->add_option("--target-categories", a.target_categories,
                   "COCO file whose categories are the mapping targets");
    ev->add_option("--conf-thr", a.eval.recall.conf_thr, "Score must exceed this")
        ->capture_default_str();
    ev->add_option("--iou-thr", a.eval.recall.iou_thr, "Mask IoU must exceed this")
        ->capture_default_str();
    ev->add_flag("--require-category,!--class-agnostic", a.eval.recall.require_category,
                 "Require matching categories");
    ev->add_option("--output", a.eval_output, "Directory for machine-readable reports");

    auto* stats = app.add_subcommand("stats", "Print split statistics for a tri-layer file");
    stats->add_option("--trilayer", a.stats.trilayer, "Tri-layer file written by `reason`");
    add_split_flags(stats, a.stats.split, a.stats_connectivity);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << pipeline::kToolVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error[config]: " << e.what() << "\n" << "Run with --help for usage.\n";
        return 2;
    }

    try {
        if (reason->parsed()) {
            a.reason.amodal = optional_path(a.amodal);
            a.reason.depth_dir = optional_path(a.depth_dir);
            const auto conv = io::parse_depth_convention(a.depth_convention);
            if (!conv) throw ConfigError("unknown --depth-convention: " + a.depth_convention);
            a.reason.depth_convention = *conv;
            pipeline::run_reason(a.reason, err);
        } else if (split->parsed()) {
            a.split.split.connectivity = to_connectivity(a.split_connectivity);
            pipeline::run_split(a.split, err);
        } else if (synth->parsed()) {
            a.synth.images_dir = optional_path(a.images_dir);
            pipeline::run_synth(a.synth, err);
        } else if (ev->parsed()) {
            if (a.protocol == "recall") a.eval.protocol = pipeline::EvalProtocol::kRecall;
            else if (a.protocol == "gtbox-miou") a.eval.protocol = pipeline::EvalProtocol::kGtBoxMiou;
            else if (a.protocol == "amodal-miou") a.eval.protocol = pipeline::EvalProtocol::kAmodalMiou;
            else throw ConfigError("unknown --protocol: " + a.protocol);
            a.eval.detections = optional_path(a.detections);
            a.eval.predictions = optional_path(a.predictions);
            a.eval.source = optional_path(a.source);
            a.eval.category_map = optional_path(a.category_map);
            a.eval.target_categories = optional_path(a.target_categories);
            a.eval.output_dir = optional_path(a.eval_output);
            pipeline::run_eval(a.eval, out);
        } else if (stats->parsed()) {
            a.stats.split.connectivity = to_connectivity(a.stats_connectivity);
            pipeline::run_stats(a.stats, out);
        }
    } catch (const Error& e) {
        err << "error[" << to_string(e.category()) << "]: " << e.what() << "\n";
        return e.category() == ErrorCategory::kConfig ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error[io]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace occkit::cli
