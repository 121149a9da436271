#include "occkit/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>

#include "occkit/json_codec.hpp"
#include "occkit/parallel.hpp"
#include "occkit/png.hpp"

namespace occkit::pipeline {

namespace {

using io::Json;

void require_file(const fs::path& p, const char* what) {
    std::error_code ec;
    if (p.empty()) throw ConfigError(std::string("missing required path: ") + what);
    if (!fs::is_regular_file(p, ec)) {
        throw ConfigError(std::string(what) + " not found: " + p.string());
    }
}

void require_dir(const fs::path& p, const char* what) {
    std::error_code ec;
    if (!fs::is_directory(p, ec)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

void require_output(const fs::path& p) {
    if (p.empty()) throw ConfigError("missing required path: --output");
    std::error_code ec;
    if (fs::exists(p, ec) && !fs::is_directory(p, ec)) {
        throw ConfigError("output path exists and is not a directory: " + p.string());
    }
}

void require_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

void require_workers(int workers) {
    if (workers < 1 || workers > 256) throw ConfigError("--workers must be in [1, 256]");
}

void validate_split_config(const splits::SplitConfig& c) {
    if (c.connectivity != mask::Connectivity::kFour && c.connectivity != mask::Connectivity::kEight) {
        throw ConfigError("--connectivity must be 4 or 8");
    }
    if (c.min_piece_area < 1) throw ConfigError("--min-piece-area must be >= 1");
    require_workers(c.workers);
}

void make_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

struct InputRecord {
    std::string role;
    fs::path path;
};

void write_run_manifest(const fs::path& dir, const std::string& command, const Json& config,
                        const std::vector<InputRecord>& inputs) {
    Json in = Json::array();
    for (const auto& i : inputs) {
        in.push_back({{"role", i.role}, {"path", i.path.generic_string()},
                      {"sha256", sha256_file(i.path)}});
    }
    const Json manifest{{"tool", "occkit"},
                        {"version", kToolVersion},
                        {"command", command},
                        {"config", config},
                        {"inputs", in}};
    io::write_text_file(dir / (command + ".manifest.json"), io::canonical_dump(manifest));
}

Json split_config_json(const splits::SplitConfig& c) {
    return {{"connectivity", static_cast<int>(c.connectivity)},
            {"min_piece_area", c.min_piece_area}};
}

struct ImageOutcome {
    std::vector<occlusion::OcclusionRelation> relations;
    std::vector<io::TriLayerTarget> targets;
    std::vector<occlusion::PairSkip> skips;
    std::optional<fs::path> depth_file;
};

ImageOutcome reason_one(const io::Dataset& dataset, const io::ImageInfo& image,
                        const ReasonOptions& o) {
    ImageOutcome out;
    const auto objects = occlusion::image_objects(dataset, image.id);
    std::optional<io::DepthMap> depth;
    if (o.depth_dir && o.reasoner.require_depth) {
        out.depth_file = depth_path_for(*o.depth_dir, image);
        if (out.depth_file) {
            depth = io::load_depth(*out.depth_file, o.depth_convention, o.depth_scale);
            if (depth->height() != image.height || depth->width() != image.width) {
                if (!o.resize_depth) {
                    throw ValidationError(out.depth_file->string() + ": depth map is " +
                                          std::to_string(depth->height()) + "x" +
                                          std::to_string(depth->width()) + " but image " +
                                          std::to_string(image.id) + " is " +
                                          std::to_string(image.height) + "x" +
                                          std::to_string(image.width) +
                                          " (pass --resize-depth to resample)");
                }
                depth = depth->resized(image.height, image.width);
            }
        }
    }
    auto result = occlusion::reason_image(objects, depth ? &*depth : nullptr, o.reasoner);
    out.relations = std::move(result.relations);
    out.targets = std::move(result.targets);
    out.skips = std::move(result.skips);
    return out;
}

Json evidence_json(const occlusion::OcclusionEvidence& ev) {
    Json j{{"a", ev.a}, {"b", ev.b}, {"i_a", ev.i_a}, {"i_b", ev.i_b}};
    j["d_a"] = ev.d_a ? Json(*ev.d_a) : Json(nullptr);
    j["d_b"] = ev.d_b ? Json(*ev.d_b) : Json(nullptr);
    return j;
}

std::map<io::Id, mask::BinaryMask> decode_predictions(const std::map<io::Id, mask::RleMask>& rles) {
    std::map<io::Id, mask::BinaryMask> out;
    for (const auto& [id, rle] : rles) out.emplace(id, mask::rle_decode(rle));
    return out;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256: digest init failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 15];
    }
    return hex;
}

std::optional<fs::path> depth_path_for(const fs::path& depth_dir, const io::ImageInfo& image) {
    std::error_code ec;
    if (!image.file_name.empty()) {
        const fs::path by_name = depth_dir / fs::path(image.file_name).filename().replace_extension(".png");
        if (fs::is_regular_file(by_name, ec)) return by_name;
    }
    const fs::path by_id = depth_dir / (std::to_string(image.id) + ".png");
    if (fs::is_regular_file(by_id, ec)) return by_id;
    return std::nullopt;
}

std::map<io::Id, mask::RleMask> load_mask_predictions(const fs::path& path) {
    std::map<io::Id, mask::RleMask> out;
    Json root;
    try {
        root = Json::parse(io::read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": invalid JSON: " + e.what());
    }
    if (!root.is_array()) throw ParseError(path.string() + ": predictions must be an array");
    for (const auto& p : root) {
        if (!p.is_object() || !p.contains("annotation_id") || !p["annotation_id"].is_number_integer() ||
            !p.contains("segmentation")) {
            throw ParseError(path.string() +
                             ": prediction entries need \"annotation_id\" and \"segmentation\"");
        }
        const io::Id id = p["annotation_id"].get<io::Id>();
        const std::string ctx = path.string() + ": prediction for annotation " + std::to_string(id);
        if (!out.emplace(id, io::rle_from_json(p["segmentation"], ctx)).second) {
            throw ParseError(ctx + ": duplicate prediction");
        }
    }
    return out;
}

// ---------------------------------------------------------------- validation

void validate(const ReasonOptions& o) {
    require_file(o.annotations, "--annotations");
    if (o.amodal) require_file(*o.amodal, "--amodal");
    if (o.depth_dir) require_dir(*o.depth_dir, "--depth-dir");
    if (o.reasoner.require_depth && !o.depth_dir) {
        throw ConfigError("depth verification is on but no --depth-dir was given "
                          "(pass --no-require-depth to reason from intersections only)");
    }
    if (!(o.depth_scale > 0.0) || !std::isfinite(o.depth_scale)) {
        throw ConfigError("--depth-scale must be a positive number");
    }
    if (o.reasoner.contact_radius < 0 || o.reasoner.contact_radius > 64) {
        throw ConfigError("--contact-radius must be in [0, 64]");
    }
    require_workers(o.workers);
    require_output(o.output_dir);
}

void validate(const SplitOptions& o) {
    require_file(o.trilayer, "--trilayer");
    validate_split_config(o.split);
    require_output(o.output_dir);
}

void validate(const SynthOptions& o) {
    require_file(o.annotations, "--annotations");
    require_unit(o.synth.min_overlap, "--min-overlap");
    require_unit(o.synth.min_visible, "--min-visible");
    if (o.synth.max_tries < 1) throw ConfigError("--max-tries must be >= 1");
    if (o.synth.max_slot_factor < 1) throw ConfigError("slot factor must be >= 1");
    if (o.images_dir) require_dir(*o.images_dir, "--images-dir");
    require_workers(o.synth.workers);
    require_output(o.output_dir);
}

void validate(const EvalOptions& o) {
    require_file(o.annotations, "--annotations");
    require_unit(o.recall.conf_thr, "--conf-thr");
    require_unit(o.recall.iou_thr, "--iou-thr");
    if (o.output_dir) require_output(*o.output_dir);
    switch (o.protocol) {
        case EvalProtocol::kRecall:
            if (o.manifests.empty()) throw ConfigError("missing required path: --manifest");
            for (const auto& m : o.manifests) require_file(m, "--manifest");
            if (!o.detections) throw ConfigError("missing required path: --detections");
            require_file(*o.detections, "--detections");
            break;
        case EvalProtocol::kGtBoxMiou:
            if (!o.predictions) throw ConfigError("missing required path: --predictions");
            require_file(*o.predictions, "--predictions");
            if (o.category_map) {
                require_file(*o.category_map, "--category-map");
                if (!o.target_categories) {
                    throw ConfigError("--category-map needs --target-categories");
                }
                require_file(*o.target_categories, "--target-categories");
            }
            break;
        case EvalProtocol::kAmodalMiou:
            if (!o.source) throw ConfigError("missing required path: --source");
            require_file(*o.source, "--source");
            if (!o.predictions) throw ConfigError("missing required path: --predictions");
            require_file(*o.predictions, "--predictions");
            break;
    }
}

void validate(const StatsOptions& o) {
    require_file(o.trilayer, "--trilayer");
    validate_split_config(o.split);
}

// ---------------------------------------------------------------- runners

void run_reason(const ReasonOptions& o, std::ostream& log) {
    validate(o);
    io::Dataset dataset = io::load_coco(o.annotations);
    if (o.amodal) io::load_amodal_sidecar(*o.amodal, dataset);

    const auto& images = dataset.images();
    std::vector<ImageOutcome> outcomes(images.size());
    parallel_for(images.size(), o.workers,
                 [&](std::size_t i) { outcomes[i] = reason_one(dataset, images[i], o); });

    std::vector<io::TriLayerTarget> targets;
    Json relations = Json::array();
    Json skips = Json::array();
    std::vector<InputRecord> inputs{{"annotations", o.annotations}};
    if (o.amodal) inputs.push_back({"amodal", *o.amodal});
    std::size_t n_relations = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        auto& oc = outcomes[i];
        for (auto& t : oc.targets) targets.push_back(std::move(t));
        for (const auto& r : oc.relations) {
            relations.push_back({{"image_id", images[i].id},
                                 {"occludee_id", r.occludee_id},
                                 {"occluder_id", r.occluder_id},
                                 {"evidence", evidence_json(r.evidence)}});
            ++n_relations;
        }
        for (const auto& s : oc.skips) {
            skips.push_back({{"image_id", images[i].id}, {"a", s.a}, {"b", s.b}, {"reason", s.reason}});
        }
        if (oc.depth_file) inputs.push_back({"depth", *oc.depth_file});
    }
    std::sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) {
        return a.annotation_id < b.annotation_id;
    });

    const Json config{{"contact_radius", o.reasoner.contact_radius},
                      {"require_depth", o.reasoner.require_depth},
                      {"depth_convention", io::to_string(o.depth_convention)},
                      {"depth_scale", o.depth_scale},
                      {"resize_depth", o.resize_depth}};
    const std::string trilayer_text = io::format_trilayer(dataset, targets);
    make_output_dir(o.output_dir);
    io::write_text_file(o.output_dir / kTrilayerFile, trilayer_text);
    io::write_text_file(o.output_dir / kRelationsFile,
                        io::canonical_dump({{"relations", relations}, {"skipped_pairs", skips}}));
    write_run_manifest(o.output_dir, "reason", config, inputs);

    log << "reason: " << images.size() << " images, " << targets.size() << " targets, "
        << n_relations << " relations, " << skips.size() << " skipped pairs\n";
}

void run_split(const SplitOptions& o, std::ostream& log) {
    validate(o);
    const io::TriLayerFile file = io::load_trilayer(o.trilayer);
    const auto result = splits::build_splits(file.dataset, file.targets, o.split);
    make_output_dir(o.output_dir);
    io::write_text_file(o.output_dir / kSeparatedFile, splits::format_manifest(result.separated));
    io::write_text_file(o.output_dir / kOccludedFile, splits::format_manifest(result.occluded));
    io::write_text_file(o.output_dir / kStatsFile, splits::format_statistics(result.stats));
    write_run_manifest(o.output_dir, "split", split_config_json(o.split), {{"trilayer", o.trilayer}});
    log << "split: " << result.separated.total << " separated, " << result.occluded.total
        << " occluded\n";
}

void run_synth(const SynthOptions& o, std::ostream& log) {
    validate(o);
    const io::Dataset dataset = io::load_coco(o.annotations);
    const synth::Corpus corpus = synth::generate_corpus(dataset, o.count, o.synth, o.seed);
    make_output_dir(o.output_dir);
    io::write_text_file(o.output_dir / kSamplesFile, synth::format_samples(dataset, corpus.samples));

    std::size_t composites = 0;
    if (o.images_dir) {
        const fs::path dir = o.output_dir / "composites";
        make_output_dir(dir);
        for (std::size_t k = 0; k < corpus.samples.size(); ++k) {
            const auto& s = corpus.samples[k];
            const io::AnnotationRecord* donor = dataset.find_annotation(s.donor_annotation_id);
            const io::ImageInfo& victim_image = *dataset.find_image(s.image_id);
            const io::ImageInfo& donor_image = *dataset.find_image(donor->image_id);
            const fs::path victim_png = *o.images_dir / fs::path(victim_image.file_name).filename().replace_extension(".png");
            const fs::path donor_png = *o.images_dir / fs::path(donor_image.file_name).filename().replace_extension(".png");
            std::error_code ec;
            if (!fs::is_regular_file(victim_png, ec) || !fs::is_regular_file(donor_png, ec)) continue;
            const io::RasterImage target = io::read_png(victim_png);
            const io::RasterImage source = io::read_png(donor_png);
            const mask::BinaryMask donor_mask = io::modal_mask(*donor, donor_image);
            const auto box = mask::bounding_box(donor_mask);
            if (target.channels != source.channels || target.bit_depth != source.bit_depth ||
                target.height != victim_image.height || target.width != victim_image.width ||
                source.height != donor_image.height || source.width != donor_image.width) {
                continue;
            }
            io::RasterImage patch_pixels{box.row1 - box.row0 + 1, box.col1 - box.col0 + 1,
                                         source.channels, source.bit_depth, {}};
            mask::BinaryMask patch(patch_pixels.height, patch_pixels.width);
            for (int r = box.row0; r <= box.row1; ++r) {
                for (int c = box.col0; c <= box.col1; ++c) {
                    if (donor_mask.at(r, c)) patch.set(r - box.row0, c - box.col0);
                    for (int ch = 0; ch < source.channels; ++ch) {
                        patch_pixels.samples.push_back(source.at(r, c, ch));
                    }
                }
            }
            io::write_png(dir / ("sample_" + std::to_string(k + 1) + ".png"),
                          synth::composite(target, patch_pixels, patch, s.placement));
            ++composites;
        }
    }

    const Json config{{"count", o.count},
                      {"seed", o.seed},
                      {"min_overlap", o.synth.min_overlap},
                      {"min_visible", o.synth.min_visible},
                      {"min_donor_area", o.synth.min_donor_area},
                      {"max_tries", o.synth.max_tries}};
    write_run_manifest(o.output_dir, "synth", config, {{"annotations", o.annotations}});
    log << "synth: " << corpus.samples.size() << " samples from " << corpus.slots_used << " slots";
    if (o.images_dir) log << ", " << composites << " composites";
    log << "\n";
    if (corpus.exhausted) {
        log << "warning: placements exhausted before reaching " << o.count << " samples\n";
    }
}

void run_eval(const EvalOptions& o, std::ostream& out) {
    validate(o);
    const io::Dataset gt = io::load_coco(o.annotations);
    std::vector<InputRecord> inputs{{"annotations", o.annotations}};
    Json config{{"protocol", o.protocol == EvalProtocol::kRecall      ? "recall"
                             : o.protocol == EvalProtocol::kGtBoxMiou ? "gtbox-miou"
                                                                      : "amodal-miou"}};

    if (o.protocol == EvalProtocol::kRecall) {
        const auto detections = io::load_detections(*o.detections);
        std::vector<eval::RecallReport> reports;
        for (const auto& m : o.manifests) {
            reports.push_back(eval::eval_recall(splits::load_manifest(m), gt, detections, o.recall));
            inputs.push_back({"manifest", m});
        }
        inputs.push_back({"detections", *o.detections});
        const std::string table = eval::format_recall_table(reports);
        out << table;
        config["conf_thr"] = o.recall.conf_thr;
        config["iou_thr"] = o.recall.iou_thr;
        config["require_category"] = o.recall.require_category;
        if (o.output_dir) {
            make_output_dir(*o.output_dir);
            io::write_text_file(*o.output_dir / "recall_table.txt", table);
            for (const auto& r : reports) {
                io::write_text_file(*o.output_dir / ("recall_" + r.split_name + ".json"),
                                    eval::recall_report_json(r, o.recall));
            }
        }
    } else if (o.protocol == EvalProtocol::kGtBoxMiou) {
        io::Dataset objects = gt;
        if (o.category_map) {
            const auto mapping = eval::load_category_mapping(*o.category_map);
            const auto targets = io::load_coco(*o.target_categories).categories();
            objects = eval::map_categories(mapping, gt, targets);
            inputs.push_back({"category_map", *o.category_map});
            inputs.push_back({"target_categories", *o.target_categories});
        }
        const auto preds = load_mask_predictions(*o.predictions);
        inputs.push_back({"predictions", *o.predictions});
        std::vector<mask::BinaryMask> truth;
        std::vector<std::optional<mask::BinaryMask>> predicted;
        for (const auto& ann : objects.annotations()) {
            if (ann.is_crowd) continue;
            truth.push_back(io::modal_mask(ann, *objects.find_image(ann.image_id)));
            const auto it = preds.find(ann.annotation_id);
            predicted.push_back(it == preds.end() ? std::nullopt
                                                  : std::optional(mask::rle_decode(it->second)));
        }
        const std::string line = "gtbox-miou: " + eval::format_miou(eval::eval_miou_gtbox(truth, predicted)) +
                                 " over " + std::to_string(truth.size()) + " objects\n";
        out << line;
        if (o.output_dir) {
            make_output_dir(*o.output_dir);
            io::write_text_file(*o.output_dir / "miou_gtbox.txt", line);
        }
    } else {
        const io::Dataset source = io::load_coco(*o.source);
        const auto matches = eval::transfer_amodal_gt(source, gt);
        const auto preds = decode_predictions(load_mask_predictions(*o.predictions));
        inputs.push_back({"source", *o.source});
        inputs.push_back({"predictions", *o.predictions});
        const double miou = eval::eval_amodal_completion(matches, source, preds);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", miou);
        const std::string line = "amodal-miou: " + std::string(buf) + " over " +
                                 std::to_string(matches.size()) + " matched objects\n";
        out << line;
        if (o.output_dir) {
            make_output_dir(*o.output_dir);
            io::write_text_file(*o.output_dir / "miou_amodal.txt", line);
        }
    }
    if (o.output_dir) write_run_manifest(*o.output_dir, "eval", config, inputs);
}

void run_stats(const StatsOptions& o, std::ostream& out) {
    validate(o);
    const io::TriLayerFile file = io::load_trilayer(o.trilayer);
    const auto result = splits::build_splits(file.dataset, file.targets, o.split);
    out << splits::format_statistics(result.stats);
}

}  // namespace occkit::pipeline
