#include "occkit/occlusion.hpp"

#include <algorithm>
#include <map>

namespace occkit::occlusion {

namespace {

bool boxes_within(const mask::PixelBox& a, const mask::PixelBox& b, int radius) {
    return a.row0 - radius <= b.row1 && b.row0 <= a.row1 + radius &&
           a.col0 - radius <= b.col1 && b.col0 <= a.col1 + radius;
}

mask::BinaryMask union_of(const std::vector<Id>& ids, const std::map<Id, const ImageObject*>& by_id,
                          int height, int width) {
    mask::BinaryMask out(height, width);
    for (Id id : ids) {
        out = mask::mask_combine(mask::SetOp::kUnion, out, by_id.at(id)->modal);
    }
    return out;
}

}  // namespace

std::vector<ImageObject> image_objects(const io::Dataset& dataset, Id image_id) {
    const io::ImageInfo* image = dataset.find_image(image_id);
    if (!image) throw ValidationError("unknown image " + std::to_string(image_id));
    std::vector<ImageObject> out;
    for (std::size_t idx : dataset.annotations_of(image_id)) {
        const auto& ann = dataset.annotations()[idx];
        out.push_back({ann.annotation_id, io::modal_mask(ann, *image), io::amodal_mask(ann),
                       ann.is_crowd});
    }
    return out;
}

std::vector<std::pair<Id, Id>> find_connected_pairs(std::span<const ImageObject> objects,
                                                    int contact_radius) {
    if (contact_radius < 0) throw ValidationError("contact_radius must be >= 0");
    std::vector<std::size_t> live;
    std::vector<mask::PixelBox> boxes(objects.size());
    for (std::size_t i = 0; i < objects.size(); ++i) {
        if (objects[i].is_crowd) continue;
        boxes[i] = mask::bounding_box(objects[i].modal);
        if (!boxes[i].empty()) live.push_back(i);
    }

    // Dilating both masks by r meets iff dilating one by 2r reaches the other.
    const int reach = 2 * contact_radius;
    std::vector<std::pair<Id, Id>> pairs;
    for (std::size_t x = 0; x < live.size(); ++x) {
        const ImageObject& a = objects[live[x]];
        std::optional<mask::BinaryMask> grown;
        for (std::size_t y = x + 1; y < live.size(); ++y) {
            const ImageObject& b = objects[live[y]];
            if (!boxes_within(boxes[live[x]], boxes[live[y]], reach)) continue;
            if (!grown) grown = mask::dilate(a.modal, reach);
            if (mask::intersection_area(*grown, b.modal) > 0) {
                pairs.emplace_back(std::min(a.annotation_id, b.annotation_id),
                                   std::max(a.annotation_id, b.annotation_id));
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

std::variant<OcclusionEvidence, PairSkip> compute_evidence(const ImageObject& a,
                                                           const ImageObject& b,
                                                           const io::DepthMap* depth) {
    if (a.modal.empty() || b.modal.empty()) {
        return PairSkip{a.annotation_id, b.annotation_id, "empty modal mask"};
    }
    if (!a.amodal || !b.amodal) {
        return PairSkip{a.annotation_id, b.annotation_id, "missing amodal mask"};
    }
    OcclusionEvidence ev;
    ev.a = a.annotation_id;
    ev.b = b.annotation_id;
    ev.i_a = mask::intersection_area(*a.amodal, b.modal);
    ev.i_b = mask::intersection_area(*b.amodal, a.modal);
    if (depth) {
        ev.d_a = depth->mean_over(a.modal);
        ev.d_b = depth->mean_over(b.modal);
    }
    return ev;
}

Order decide_order(const OcclusionEvidence& ev, bool require_depth) {
    if (ev.i_a == ev.i_b) return Order::kNone;
    const bool a_behind = ev.i_a > ev.i_b;
    if (!require_depth) return a_behind ? Order::kAOccludedByB : Order::kBOccludedByA;
    if (!ev.d_a || !ev.d_b) return Order::kNone;
    // The occludee must be strictly farther than its occluder.
    if (a_behind && *ev.d_a > *ev.d_b) return Order::kAOccludedByB;
    if (!a_behind && *ev.d_b > *ev.d_a) return Order::kBOccludedByA;
    return Order::kNone;
}

std::vector<io::TriLayerTarget> build_trilayer_targets(std::span<const ImageObject> objects,
                                                       std::span<const OcclusionRelation> relations) {
    std::map<Id, const ImageObject*> by_id;
    for (const auto& o : objects) by_id[o.annotation_id] = &o;
    std::map<Id, std::vector<Id>> occluders, occludees;
    for (const auto& r : relations) {
        if (!by_id.contains(r.occluder_id) || !by_id.contains(r.occludee_id)) {
            throw ValidationError("relation references an object outside the image");
        }
        occluders[r.occludee_id].push_back(r.occluder_id);
        occludees[r.occluder_id].push_back(r.occludee_id);
    }

    std::vector<io::TriLayerTarget> targets;
    for (const auto& o : objects) {
        if (o.is_crowd) continue;
        io::TriLayerTarget t;
        t.annotation_id = o.annotation_id;
        t.occluder_ids = occluders[o.annotation_id];
        t.occludee_ids = occludees[o.annotation_id];
        std::sort(t.occluder_ids.begin(), t.occluder_ids.end());
        std::sort(t.occludee_ids.begin(), t.occludee_ids.end());
        const int h = o.modal.height(), w = o.modal.width();
        t.occluder_mask = mask::rle_encode(union_of(t.occluder_ids, by_id, h, w));
        t.occludee_mask = mask::rle_encode(union_of(t.occludee_ids, by_id, h, w));
        targets.push_back(std::move(t));
    }
    return targets;
}

ImageReasoning reason_image(std::span<const ImageObject> objects, const io::DepthMap* depth,
                            const ReasonerConfig& config) {
    ImageReasoning out;
    std::map<Id, const ImageObject*> by_id;
    for (const auto& o : objects) by_id[o.annotation_id] = &o;

    for (const auto& [ida, idb] : find_connected_pairs(objects, config.contact_radius)) {
        if (config.require_depth && !depth) {
            out.skips.push_back({ida, idb, "no depth map"});
            continue;
        }
        auto result = compute_evidence(*by_id.at(ida), *by_id.at(idb), depth);
        if (auto* skip = std::get_if<PairSkip>(&result)) {
            out.skips.push_back(std::move(*skip));
            continue;
        }
        const auto& ev = std::get<OcclusionEvidence>(result);
        switch (decide_order(ev, config.require_depth)) {
            case Order::kAOccludedByB: out.relations.push_back({ev.a, ev.b, ev}); break;
            case Order::kBOccludedByA: out.relations.push_back({ev.b, ev.a, ev}); break;
            case Order::kNone: break;
        }
    }
    out.targets = build_trilayer_targets(objects, out.relations);
    return out;
}

}  // namespace occkit::occlusion
