#include "occkit/splits.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "occkit/json_codec.hpp"
#include "occkit/parallel.hpp"

namespace occkit::splits {

int count_pieces(const mask::BinaryMask& modal, const SplitConfig& config) {
    const auto cc = mask::connected_components(modal, config.connectivity);
    return static_cast<int>(std::count_if(cc.sizes.begin(), cc.sizes.end(), [&](std::size_t s) {
        return s >= config.min_piece_area;
    }));
}

ObjectClass classify_object(const mask::BinaryMask& modal, bool is_occludee,
                            const SplitConfig& config) {
    if (count_pieces(modal, config) >= 2) return ObjectClass::kSeparated;
    return is_occludee ? ObjectClass::kOccluded : ObjectClass::kNeither;
}

ObjectClass classify_object(const mask::BinaryMask& modal, Id annotation_id,
                            std::span<const occlusion::OcclusionRelation> relations,
                            const SplitConfig& config) {
    const bool occludee = std::any_of(relations.begin(), relations.end(), [&](const auto& r) {
        return r.occludee_id == annotation_id;
    });
    return classify_object(modal, occludee, config);
}

SplitResult build_splits(const io::Dataset& dataset, std::span<const io::TriLayerTarget> targets,
                         const SplitConfig& config) {
    std::map<Id, const io::TriLayerTarget*> target_of;
    for (const auto& t : targets) target_of[t.annotation_id] = &t;

    std::vector<const io::AnnotationRecord*> work;
    for (const auto& a : dataset.annotations()) {
        if (!a.is_crowd) work.push_back(&a);
    }

    std::vector<ObjectClass> classes(work.size(), ObjectClass::kNeither);
    parallel_for(work.size(), config.workers, [&](std::size_t i) {
        const auto& ann = *work[i];
        const auto it = target_of.find(ann.annotation_id);
        const bool occludee = it != target_of.end() && !it->second->occluder_ids.empty();
        classes[i] = classify_object(io::modal_mask(ann, *dataset.find_image(ann.image_id)),
                                     occludee, config);
    });

    SplitResult out;
    out.separated.split_name = "separated";
    out.occluded.split_name = "occluded";
    for (std::size_t i = 0; i < work.size(); ++i) {
        SplitManifest* m = nullptr;
        if (classes[i] == ObjectClass::kSeparated) m = &out.separated;
        if (classes[i] == ObjectClass::kOccluded) m = &out.occluded;
        if (!m) continue;
        m->member_ids.push_back(work[i]->annotation_id);
        ++m->per_category[work[i]->category_id];
    }
    out.separated.total = out.separated.member_ids.size();
    out.occluded.total = out.occluded.member_ids.size();

    out.stats.total_objects = work.size();
    out.stats.separated = out.separated.total;
    out.stats.occluded = out.occluded.total;
    for (const auto& t : targets) {
        if (!t.occluder_ids.empty()) ++out.stats.occluder_masks;
        if (!t.occludee_ids.empty()) ++out.stats.occludee_masks;
    }
    return out;
}

std::string format_manifest(const SplitManifest& manifest) {
    io::Json per_category = io::Json::object();
    for (const auto& [cat, n] : manifest.per_category) per_category[std::to_string(cat)] = n;
    io::Json j{{"split", manifest.split_name},
               {"total", manifest.total},
               {"per_category", per_category},
               {"annotation_ids", manifest.member_ids}};
    return io::canonical_dump(j);
}

SplitManifest parse_manifest(const std::string& text) {
    SplitManifest m;
    try {
        const io::Json j = io::Json::parse(text);
        m.split_name = j.at("split").get<std::string>();
        m.total = j.at("total").get<std::size_t>();
        m.member_ids = j.at("annotation_ids").get<std::vector<Id>>();
        for (const auto& [key, value] : j.at("per_category").items()) {
            m.per_category[std::stoll(key)] = value.get<std::size_t>();
        }
    } catch (const io::Json::exception& e) {
        throw ParseError(std::string("split manifest: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ParseError(std::string("split manifest: bad category key: ") + e.what());
    }
    if (m.total != m.member_ids.size()) {
        throw ParseError("split manifest: total " + std::to_string(m.total) + " but " +
                         std::to_string(m.member_ids.size()) + " ids");
    }
    return m;
}

SplitManifest load_manifest(const std::filesystem::path& path) {
    try {
        return parse_manifest(io::read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_statistics(const SplitStatistics& stats) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%-16s | %14s\n"
                  "-----------------+---------------\n"
                  "%-16s | %14zu\n"
                  "%-16s | %14zu\n"
                  "%-16s | %14zu\n"
                  "%-16s | %14zu\n"
                  "%-16s | %14zu\n",
                  "Dataset", "# Total Objects", "All objects", stats.total_objects,
                  "Separated", stats.separated, "Occluded", stats.occluded, "Occluder Masks",
                  stats.occluder_masks, "Occludee Masks", stats.occludee_masks);
    return buf;
}

}  // namespace occkit::splits
