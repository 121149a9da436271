#include "occkit/mask.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace occkit::mask {

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionMismatch(std::string(op) + ": mask sizes differ (" +
                                std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()) + ")");
    }
}

// Union-find over provisional labels, path halving.
class LabelForest {
public:
    int make() {
        parent_.push_back(static_cast<int>(parent_.size()));
        return parent_.back();
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[b] = a;
        else parent_[a] = b;
    }

private:
    std::vector<int> parent_;
};

// One-dimensional dilation of `len` elements spaced `stride` apart.
void dilate_line(const std::uint8_t* in, std::uint8_t* out, int len, std::ptrdiff_t stride,
                 int radius) {
    // Running count of set elements inside the window [i - radius, i + radius].
    int count = 0;
    for (int i = 0; i < std::min(radius, len); ++i) count += in[i * stride];
    for (int i = 0; i < len; ++i) {
        const int enter = i + radius;
        const int leave = i - radius - 1;
        if (enter < len) count += in[enter * stride];
        if (leave >= 0) count -= in[leave * stride];
        out[i * stride] = count > 0 ? 1 : 0;
    }
}

}  // namespace

BinaryMask::BinaryMask(int height, int width) : height_(height), width_(width) {
    if (height < 1 || width < 1) {
        throw ValidationError("mask dimensions must be >= 1, got " + std::to_string(height) +
                              "x" + std::to_string(width));
    }
    bits_.assign(static_cast<std::size_t>(height) * width, 0);
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> bits)
    : BinaryMask(height, width) {
    if (bits.size() != bits_.size()) {
        throw ValidationError("mask buffer holds " + std::to_string(bits.size()) +
                              " pixels, expected " + std::to_string(bits_.size()));
    }
    for (auto& b : bits) b = b ? 1 : 0;
    bits_ = std::move(bits);
}

BinaryMask BinaryMask::filled(int height, int width) {
    BinaryMask m(height, width);
    std::fill(m.bits_.begin(), m.bits_.end(), std::uint8_t{1});
    return m;
}

std::size_t BinaryMask::area() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

RleMask rle_encode(const BinaryMask& mask) {
    RleMask rle{mask.height(), mask.width(), {}};
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (int col = 0; col < mask.width(); ++col) {
        for (int row = 0; row < mask.height(); ++row) {
            const std::uint8_t v = mask.at(row, col) ? 1 : 0;
            if (v != current) {
                rle.counts.push_back(run);
                run = 0;
                current = v;
            }
            ++run;
        }
    }
    rle.counts.push_back(run);
    return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
    if (rle.height < 1 || rle.width < 1) {
        throw MalformedRle("RLE size must be positive, got " + std::to_string(rle.height) + "x" +
                           std::to_string(rle.width));
    }
    const std::uint64_t expected = static_cast<std::uint64_t>(rle.height) * rle.width;
    const std::uint64_t actual =
        std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
    if (actual != expected) {
        throw MalformedRle("RLE counts sum to " + std::to_string(actual) + ", expected " +
                           std::to_string(expected));
    }
    BinaryMask mask(rle.height, rle.width);
    std::uint64_t pos = 0;
    bool value = false;
    for (const auto run : rle.counts) {
        if (value) {
            for (std::uint64_t k = pos; k < pos + run; ++k) {
                mask.set(static_cast<int>(k % rle.height), static_cast<int>(k / rle.height));
            }
        }
        pos += run;
        value = !value;
    }
    return mask;
}

BinaryMask rasterize(const PolygonSet& polys, int height, int width) {
    BinaryMask out(height, width);
    std::vector<double> crossings;
    for (const auto& loop : polys.polygons) {
        const std::size_t n = loop.size() / 2;
        if (n < 3) continue;
        for (int row = 0; row < height; ++row) {
            const double y = row + 0.5;
            crossings.clear();
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                const double xi = loop[2 * i], yi = loop[2 * i + 1];
                const double xj = loop[2 * j], yj = loop[2 * j + 1];
                if ((yi > y) != (yj > y)) {
                    crossings.push_back((xj - xi) * (y - yi) / (yj - yi) + xi);
                }
            }
            if (crossings.empty()) continue;
            std::sort(crossings.begin(), crossings.end());
            // A center is inside iff an odd number of crossings lie strictly right of it.
            for (int col = 0; col < width; ++col) {
                const double x = col + 0.5;
                const auto right = crossings.end() -
                                   std::upper_bound(crossings.begin(), crossings.end(), x);
                if (right % 2 == 1) out.set(row, col);
            }
        }
    }
    return out;
}

std::size_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b, "intersection_area");
    const auto ab = a.bits();
    const auto bb = b.bits();
    std::size_t n = 0;
    for (std::size_t i = 0; i < ab.size(); ++i) n += ab[i] & bb[i];
    return n;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b, "mask_iou");
    const auto ab = a.bits();
    const auto bb = b.bits();
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < ab.size(); ++i) {
        inter += ab[i] & bb[i];
        uni += ab[i] | bb[i];
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

Components connected_components(const BinaryMask& mask, Connectivity connectivity) {
    const int h = mask.height();
    const int w = mask.width();
    std::vector<int> provisional(mask.pixel_count(), -1);
    LabelForest forest;
    auto idx = [w](int r, int c) { return static_cast<std::size_t>(r) * w + c; };

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask.at(r, c)) continue;
            int label = -1;
            auto visit = [&](int rr, int cc) {
                if (rr < 0 || cc < 0 || cc >= w) return;
                const int other = provisional[idx(rr, cc)];
                if (other < 0) return;
                if (label < 0) label = other;
                else forest.unite(label, other);
            };
            visit(r, c - 1);
            visit(r - 1, c);
            if (connectivity == Connectivity::kEight) {
                visit(r - 1, c - 1);
                visit(r - 1, c + 1);
            }
            provisional[idx(r, c)] = label < 0 ? forest.make() : label;
        }
    }

    Components out;
    out.labels.assign(mask.pixel_count(), 0);
    std::vector<int> final_label;
    for (std::size_t i = 0; i < provisional.size(); ++i) {
        if (provisional[i] < 0) continue;
        const int root = forest.find(provisional[i]);
        if (static_cast<std::size_t>(root) >= final_label.size()) {
            final_label.resize(root + 1, 0);
        }
        if (final_label[root] == 0) {
            final_label[root] = ++out.count;
            out.sizes.push_back(0);
        }
        out.labels[i] = final_label[root];
        ++out.sizes[final_label[root] - 1];
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
    if (radius < 0) throw ValidationError("dilate: radius must be >= 0");
    if (radius == 0) return mask;
    const int h = mask.height();
    const int w = mask.width();
    std::vector<std::uint8_t> horizontal(mask.pixel_count());
    std::vector<std::uint8_t> result(mask.pixel_count());
    const auto src = mask.bits();
    for (int r = 0; r < h; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * w;
        dilate_line(src.data() + base, horizontal.data() + base, w, 1, radius);
    }
    for (int c = 0; c < w; ++c) {
        dilate_line(horizontal.data() + c, result.data() + c, h, w, radius);
    }
    return BinaryMask(h, w, std::move(result));
}

BinaryMask mask_combine(SetOp op, const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b, "mask_combine");
    const auto ab = a.bits();
    const auto bb = b.bits();
    std::vector<std::uint8_t> out(ab.size());
    for (std::size_t i = 0; i < ab.size(); ++i) {
        switch (op) {
            case SetOp::kUnion: out[i] = ab[i] | bb[i]; break;
            case SetOp::kIntersection: out[i] = ab[i] & bb[i]; break;
            case SetOp::kDifference: out[i] = ab[i] & (bb[i] ^ 1); break;
        }
    }
    return BinaryMask(a.height(), a.width(), std::move(out));
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
    require_same_shape(inner, outer, "is_subset");
    const auto ib = inner.bits();
    const auto ob = outer.bits();
    for (std::size_t i = 0; i < ib.size(); ++i) {
        if (ib[i] && !ob[i]) return false;
    }
    return true;
}

PixelBox bounding_box(const BinaryMask& mask) {
    PixelBox box{mask.height(), mask.width(), -1, -1};
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask.at(r, c)) continue;
            box.row0 = std::min(box.row0, r);
            box.col0 = std::min(box.col0, c);
            box.row1 = std::max(box.row1, r);
            box.col1 = std::max(box.col1, c);
        }
    }
    return box;
}

}  // namespace occkit::mask
