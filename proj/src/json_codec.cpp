#include "occkit/json_codec.hpp"

#include <string>

namespace occkit::io {

namespace {

const Json& require(const Json& obj, const char* key, const std::string& context) {
    if (!obj.is_object()) throw ParseError(context + ": expected a JSON object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(context + ": missing key \"" + key + "\"");
    return *it;
}

Id require_id(const Json& obj, const char* key, const std::string& context) {
    const Json& v = require(obj, key, context);
    if (!v.is_number_integer()) {
        throw ParseError(context + ": \"" + key + "\" must be an integer");
    }
    return v.get<Id>();
}

int require_dim(const Json& obj, const char* key, const std::string& context) {
    const Id v = require_id(obj, key, context);
    if (v < 1 || v > (1 << 20)) {
        throw ParseError(context + ": \"" + key + "\" out of range: " + std::to_string(v));
    }
    return static_cast<int>(v);
}

std::string optional_string(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) throw ParseError(std::string("\"") + key + "\" must be a string");
    return it->get<std::string>();
}

std::string annotation_context(const Json& a) {
    if (a.is_object()) {
        const auto it = a.find("id");
        if (it != a.end() && it->is_number_integer()) {
            return "annotation " + std::to_string(it->get<Id>());
        }
    }
    return "annotation <no id>";
}

}  // namespace

Json rle_to_json(const mask::RleMask& rle) {
    return Json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

mask::RleMask rle_from_json(const Json& j, const std::string& context) {
    const Json& size = require(j, "size", context);
    const Json& counts = require(j, "counts", context);
    if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
        !size[1].is_number_integer()) {
        throw ParseError(context + ": RLE \"size\" must be [height, width]");
    }
    if (counts.is_string()) {
        throw ParseError(context + ": compressed (string) RLE counts are not supported");
    }
    if (!counts.is_array()) throw ParseError(context + ": RLE \"counts\" must be an array");
    mask::RleMask rle;
    rle.height = size[0].get<int>();
    rle.width = size[1].get<int>();
    rle.counts.reserve(counts.size());
    for (const auto& c : counts) {
        if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<Id>() >= 0)) {
            throw ParseError(context + ": RLE counts must be non-negative integers");
        }
        rle.counts.push_back(c.get<std::uint32_t>());
    }
    std::uint64_t total = 0;
    for (auto c : rle.counts) total += c;
    const auto expected = static_cast<std::uint64_t>(rle.height) * static_cast<std::uint64_t>(rle.width);
    if (rle.height < 1 || rle.width < 1 || total != expected) {
        throw mask::MalformedRle(context + ": RLE counts sum to " + std::to_string(total) +
                                 ", expected " + std::to_string(expected));
    }
    return rle;
}

Json segmentation_to_json(const Segmentation& seg) {
    if (const auto* rle = std::get_if<mask::RleMask>(&seg)) return rle_to_json(*rle);
    return std::get<mask::PolygonSet>(seg).polygons;
}

Segmentation segmentation_from_json(const Json& j, const std::string& context) {
    if (j.is_object()) return rle_from_json(j, context);
    if (!j.is_array()) throw ParseError(context + ": segmentation must be polygons or RLE");
    mask::PolygonSet polys;
    for (const auto& loop : j) {
        if (!loop.is_array()) throw ParseError(context + ": polygon must be a coordinate array");
        std::vector<double> coords;
        coords.reserve(loop.size());
        for (const auto& v : loop) {
            if (!v.is_number()) throw ParseError(context + ": polygon coordinates must be numbers");
            coords.push_back(v.get<double>());
        }
        if (coords.size() % 2 != 0) {
            throw ParseError(context + ": polygon has an odd number of coordinates");
        }
        polys.polygons.push_back(std::move(coords));
    }
    return polys;
}

Json image_to_json(const ImageInfo& image) {
    return Json{{"id", image.id},
                {"width", image.width},
                {"height", image.height},
                {"file_name", image.file_name}};
}

Json category_to_json(const Category& category) {
    Json j{{"id", category.id}, {"name", category.name}};
    if (!category.supercategory.empty()) j["supercategory"] = category.supercategory;
    return j;
}

Json annotation_to_json(const AnnotationRecord& ann) {
    Json j{{"id", ann.annotation_id},
           {"image_id", ann.image_id},
           {"category_id", ann.category_id},
           {"segmentation", segmentation_to_json(ann.modal)},
           {"bbox", {ann.bbox.x, ann.bbox.y, ann.bbox.w, ann.bbox.h}},
           {"iscrowd", ann.is_crowd ? 1 : 0}};
    if (ann.amodal) j["amodal_rle"] = rle_to_json(*ann.amodal);
    return j;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

Json dataset_to_json(const Dataset& dataset) {
    Json images = Json::array();
    for (const auto& im : dataset.images()) images.push_back(image_to_json(im));
    Json anns = Json::array();
    for (const auto& a : dataset.annotations()) anns.push_back(annotation_to_json(a));
    Json cats = Json::array();
    for (const auto& c : dataset.categories()) cats.push_back(category_to_json(c));
    return Json{{"images", images}, {"annotations", anns}, {"categories", cats}};
}

Dataset dataset_from_json(const Json& root) {
    if (!root.is_object()) throw ParseError("COCO file: top level must be an object");
    for (const char* key : {"images", "annotations", "categories"}) {
        const auto it = root.find(key);
        if (it == root.end()) throw ParseError(std::string("COCO file: missing key \"") + key + "\"");
        if (!it->is_array()) throw ParseError(std::string("COCO file: \"") + key + "\" must be an array");
    }

    std::vector<ImageInfo> images;
    for (const auto& j : root["images"]) {
        const std::string ctx = "image";
        ImageInfo im;
        im.id = require_id(j, "id", ctx);
        im.width = require_dim(j, "width", ctx + " " + std::to_string(im.id));
        im.height = require_dim(j, "height", ctx + " " + std::to_string(im.id));
        im.file_name = optional_string(j, "file_name");
        images.push_back(std::move(im));
    }

    std::vector<Category> categories;
    for (const auto& j : root["categories"]) {
        Category c;
        c.id = require_id(j, "id", "category");
        c.name = optional_string(j, "name");
        c.supercategory = optional_string(j, "supercategory");
        categories.push_back(std::move(c));
    }

    std::map<Id, const ImageInfo*> image_by_id;
    for (const auto& im : images) {
        if (!image_by_id.emplace(im.id, &im).second) {
            throw ParseError("duplicate image id " + std::to_string(im.id));
        }
    }

    std::vector<AnnotationRecord> annotations;
    for (const auto& j : root["annotations"]) {
        const std::string ctx = annotation_context(j);
        AnnotationRecord a;
        a.annotation_id = require_id(j, "id", ctx);
        a.image_id = require_id(j, "image_id", ctx);
        a.category_id = require_id(j, "category_id", ctx);
        const auto img = image_by_id.find(a.image_id);
        if (img == image_by_id.end()) {
            throw ParseError(ctx + ": dangling image_id " + std::to_string(a.image_id));
        }
        const ImageInfo& image = *img->second;
        a.modal = segmentation_from_json(require(j, "segmentation", ctx), ctx);
        if (const auto* rle = std::get_if<mask::RleMask>(&a.modal)) {
            if (rle->height != image.height || rle->width != image.width) {
                throw ParseError(ctx + ": segmentation size differs from image " +
                                 std::to_string(image.id));
            }
        }
        if (const auto it = j.find("amodal_rle"); it != j.end() && !it->is_null()) {
            a.amodal = rle_from_json(*it, ctx + " amodal_rle");
            if (a.amodal->height != image.height || a.amodal->width != image.width) {
                throw ParseError(ctx + ": amodal mask size differs from image " +
                                 std::to_string(image.id));
            }
        }
        if (const auto it = j.find("bbox"); it != j.end()) {
            if (!it->is_array() || it->size() != 4) throw ParseError(ctx + ": bbox must have 4 numbers");
            for (const auto& v : *it) {
                if (!v.is_number()) throw ParseError(ctx + ": bbox must have 4 numbers");
            }
            a.bbox = {(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>(),
                      (*it)[3].get<double>()};
        } else {
            a.bbox = bbox_of(modal_mask(a, image));
        }
        if (const auto it = j.find("iscrowd"); it != j.end()) {
            if (!it->is_number_integer() && !it->is_boolean()) {
                throw ParseError(ctx + ": iscrowd must be 0/1");
            }
            a.is_crowd = it->is_boolean() ? it->get<bool>() : it->get<int>() != 0;
        }
        annotations.push_back(std::move(a));
    }
    return Dataset(std::move(images), std::move(annotations), std::move(categories));
}

}  // namespace occkit::io
