#include "occkit/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <tuple>

#include "occkit/json_codec.hpp"

namespace occkit::eval {

std::string format_percent(std::size_t recalled, std::size_t total) {
    if (total == 0) return "0.00";
    // Hundredths of a percent, rounded half up.
    const std::uint64_t scaled = (20000ULL * recalled + total) / (2ULL * total);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(scaled / 100),
                  static_cast<unsigned long long>(scaled % 100));
    return buf;
}

std::string format_count_percent(std::size_t recalled, std::size_t total) {
    return std::to_string(recalled) + "(" + format_percent(recalled, total) + "%)";
}

RecallReport eval_recall(const splits::SplitManifest& manifest, const io::Dataset& gt,
                         std::span<const io::DetectionRecord> detections,
                         const RecallConfig& config) {
    if (config.conf_thr < 0.0 || config.conf_thr > 1.0 || config.iou_thr < 0.0 ||
        config.iou_thr > 1.0) {
        throw ValidationError("recall thresholds must lie in [0, 1]");
    }
    std::map<Id, std::vector<std::size_t>> by_image;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        if (detections[i].score > config.conf_thr) by_image[detections[i].image_id].push_back(i);
    }
    std::vector<std::optional<mask::BinaryMask>> decoded(detections.size());

    RecallReport report;
    report.split_name = manifest.split_name;
    report.total = manifest.member_ids.size();
    for (Id id : manifest.member_ids) {
        const io::AnnotationRecord* ann = gt.find_annotation(id);
        if (!ann) {
            throw ValidationError("split member " + std::to_string(id) +
                                  " is not in the ground-truth file");
        }
        const io::ImageInfo& image = *gt.find_image(ann->image_id);
        const mask::BinaryMask truth = io::modal_mask(*ann, image);

        ObjectHit hit{id, false, 0.0, 0.0};
        if (const auto it = by_image.find(ann->image_id); it != by_image.end()) {
            for (std::size_t di : it->second) {
                const auto& det = detections[di];
                if (config.require_category && det.category_id != ann->category_id) continue;
                if (!decoded[di]) {
                    if (det.mask.height != image.height || det.mask.width != image.width) {
                        throw ValidationError("detection mask size differs from image " +
                                              std::to_string(image.id));
                    }
                    decoded[di] = mask::rle_decode(det.mask);
                }
                const double iou = mask::mask_iou(truth, *decoded[di]);
                if (iou > hit.best_iou) {
                    hit.best_iou = iou;
                    hit.best_score = det.score;
                }
                if (iou > config.iou_thr) hit.recalled = true;
            }
        }
        if (hit.recalled) ++report.recalled;
        report.per_object.push_back(hit);
    }
    report.percent = format_percent(report.recalled, report.total);
    return report;
}

double eval_miou_gtbox(std::span<const mask::BinaryMask> gt,
                       std::span<const std::optional<mask::BinaryMask>> predictions) {
    if (gt.empty()) throw ValidationError("mIoU over zero ground-truth objects is undefined");
    if (predictions.size() != gt.size()) {
        throw ValidationError("expected one prediction slot per ground-truth object");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (predictions[i]) sum += mask::mask_iou(gt[i], *predictions[i]);
    }
    return 100.0 * sum / static_cast<double>(gt.size());
}

std::string format_miou(double miou) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", miou);
    return buf;
}

CategoryMapping parse_category_mapping(const std::string& text) {
    CategoryMapping m;
    try {
        const io::Json root = io::Json::parse(text);
        for (const auto& row : root.at("mapping")) {
            const Id id = row.at("id").get<Id>();
            const auto& to = row.at("maps_to");
            if (m.source_to_target.contains(id)) {
                throw ParseError("category mapping lists source id " + std::to_string(id) + " twice");
            }
            m.source_to_target[id] =
                to.is_null() ? std::nullopt : std::optional<std::string>(to.get<std::string>());
            m.source_names[id] = row.value("name", std::string{});
        }
    } catch (const io::Json::exception& e) {
        throw ParseError(std::string("category mapping: ") + e.what());
    }
    return m;
}

CategoryMapping load_category_mapping(const std::filesystem::path& path) {
    try {
        return parse_category_mapping(io::read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

io::Dataset map_categories(const CategoryMapping& mapping, const io::Dataset& gt,
                           std::span<const io::Category> target_categories) {
    std::map<std::string, const io::Category*> by_name;
    for (const auto& c : target_categories) by_name[c.name] = &c;

    std::vector<io::AnnotationRecord> kept;
    std::set<Id> used;
    for (const auto& ann : gt.annotations()) {
        const auto it = mapping.source_to_target.find(ann.category_id);
        if (it == mapping.source_to_target.end()) {
            throw ValidationError("annotation " + std::to_string(ann.annotation_id) +
                                  ": category " + std::to_string(ann.category_id) +
                                  " has no mapping entry");
        }
        if (!it->second) continue;
        const auto cat = by_name.find(*it->second);
        if (cat == by_name.end()) {
            throw ValidationError("mapping target \"" + *it->second + "\" is not a known category");
        }
        io::AnnotationRecord copy = ann;
        copy.category_id = cat->second->id;
        used.insert(copy.category_id);
        kept.push_back(std::move(copy));
    }
    std::vector<io::Category> cats;
    for (const auto& c : target_categories) {
        if (used.contains(c.id)) cats.push_back(c);
    }
    return io::Dataset(gt.images(), std::move(kept), std::move(cats));
}

std::vector<AmodalMatch> transfer_amodal_gt(const io::Dataset& source, const io::Dataset& target,
                                            double min_iou) {
    std::vector<AmodalMatch> candidates;
    for (const auto& image : target.images()) {
        const io::ImageInfo* src_image = source.find_image(image.id);
        if (!src_image) continue;
        if (src_image->height != image.height || src_image->width != image.width) continue;
        std::vector<std::pair<Id, mask::BinaryMask>> src_masks;
        for (std::size_t si : source.annotations_of(image.id)) {
            const auto& s = source.annotations()[si];
            if (s.is_crowd || !s.amodal) continue;
            src_masks.emplace_back(s.annotation_id, io::modal_mask(s, *src_image));
        }
        if (src_masks.empty()) continue;
        for (std::size_t ti : target.annotations_of(image.id)) {
            const auto& t = target.annotations()[ti];
            if (t.is_crowd) continue;
            const mask::BinaryMask tm = io::modal_mask(t, image);
            for (const auto& [sid, sm] : src_masks) {
                const double iou = mask::mask_iou(tm, sm);
                if (iou > min_iou) candidates.push_back({t.annotation_id, sid, iou});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const AmodalMatch& a, const AmodalMatch& b) {
        return std::tie(b.iou, a.target_id, a.source_id) < std::tie(a.iou, b.target_id, b.source_id);
    });
    std::set<Id> taken_target, taken_source;
    std::vector<AmodalMatch> matches;
    for (const auto& c : candidates) {
        if (taken_target.contains(c.target_id) || taken_source.contains(c.source_id)) continue;
        taken_target.insert(c.target_id);
        taken_source.insert(c.source_id);
        matches.push_back(c);
    }
    std::sort(matches.begin(), matches.end(),
              [](const AmodalMatch& a, const AmodalMatch& b) { return a.target_id < b.target_id; });
    return matches;
}

double eval_amodal_completion(std::span<const AmodalMatch> matches, const io::Dataset& source,
                              const std::map<Id, mask::BinaryMask>& predictions) {
    if (matches.empty()) throw ValidationError("amodal mIoU over zero matched objects is undefined");
    double sum = 0.0;
    for (const auto& m : matches) {
        const io::AnnotationRecord* src = source.find_annotation(m.source_id);
        if (!src || !src->amodal) {
            throw ValidationError("matched source " + std::to_string(m.source_id) +
                                  " has no amodal mask");
        }
        const auto pred = predictions.find(m.target_id);
        if (pred == predictions.end()) continue;
        sum += mask::mask_iou(mask::rle_decode(*src->amodal), pred->second);
    }
    return 100.0 * sum / static_cast<double>(matches.size());
}

std::string format_recall_table(std::span<const RecallReport> reports) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s | %8s | %16s\n", "Split", "Total", "Recalled");
    out += buf;
    out += "-------------+----------+-----------------\n";
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-12s | %8zu | %16s\n", r.split_name.c_str(), r.total,
                      format_count_percent(r.recalled, r.total).c_str());
        out += buf;
    }
    return out;
}

std::string recall_report_json(const RecallReport& report, const RecallConfig& config) {
    io::Json objects = io::Json::array();
    for (const auto& h : report.per_object) {
        objects.push_back({{"annotation_id", h.annotation_id},
                           {"recalled", h.recalled},
                           {"best_iou", h.best_iou},
                           {"best_score", h.best_score}});
    }
    io::Json j{{"split", report.split_name},
               {"recalled", report.recalled},
               {"total", report.total},
               {"percent", report.percent},
               {"summary", format_count_percent(report.recalled, report.total)},
               {"conf_thr", config.conf_thr},
               {"iou_thr", config.iou_thr},
               {"require_category", config.require_category},
               {"per_object", objects}};
    return io::canonical_dump(j);
}

}  // namespace occkit::eval
