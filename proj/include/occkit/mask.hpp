#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "occkit/errors.hpp"

namespace occkit::mask {

/// Malformed run-length data (wrong total, bad size).
struct MalformedRle : ParseError {
    using ParseError::ParseError;
};

/// Binary operands whose height/width differ.
struct DimensionMismatch : ValidationError {
    using ValidationError::ValidationError;
};

/// Dense row-major binary occupancy grid. Height and width are always >= 1.
class BinaryMask {
public:
    BinaryMask(int height, int width);
    BinaryMask(int height, int width, std::vector<std::uint8_t> bits);

    static BinaryMask filled(int height, int width);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t pixel_count() const noexcept { return bits_.size(); }

    bool at(int row, int col) const noexcept {
        return bits_[static_cast<std::size_t>(row) * width_ + col] != 0;
    }
    void set(int row, int col, bool value = true) noexcept {
        bits_[static_cast<std::size_t>(row) * width_ + col] = value ? 1 : 0;
    }

    /// Number of set pixels.
    std::size_t area() const noexcept;
    bool empty() const noexcept { return area() == 0; }

    /// Row-major bytes, each 0 or 1.
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    bool same_shape(const BinaryMask& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int height_;
    int width_;
    std::vector<std::uint8_t> bits_;
};

/// Uncompressed COCO run-length encoding: column-major runs, zeros first.
struct RleMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint32_t> counts;

    friend bool operator==(const RleMask&, const RleMask&) = default;
};

/// Closed loops as flat x0,y0,x1,y1,... coordinate lists (pixel units).
struct PolygonSet {
    std::vector<std::vector<double>> polygons;

    friend bool operator==(const PolygonSet&, const PolygonSet&) = default;
};

enum class Connectivity { kFour = 4, kEight = 8 };

enum class SetOp { kUnion, kIntersection, kDifference };

struct Components {
    int count = 0;
    /// Row-major labels; 0 is background, regions are 1..count in raster
    /// order of their first pixel.
    std::vector<int> labels;
    /// sizes[k] is the pixel count of label k+1.
    std::vector<std::size_t> sizes;
};

/// Inclusive pixel bounds of the set region.
struct PixelBox {
    int row0 = 0, col0 = 0, row1 = -1, col1 = -1;
    bool empty() const noexcept { return row1 < row0 || col1 < col0; }
};

RleMask rle_encode(const BinaryMask& mask);

/// Throws MalformedRle when the run total differs from height*width.
BinaryMask rle_decode(const RleMask& rle);

/// Rasterizes each loop with the even-odd rule at pixel centers
/// (col + 0.5, row + 0.5) and unions the loops. Loops with fewer than
/// three vertices contribute nothing.
BinaryMask rasterize(const PolygonSet& polys, int height, int width);

/// |a & b| / |a | b|, or 0 when both are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

std::size_t intersection_area(const BinaryMask& a, const BinaryMask& b);

Components connected_components(const BinaryMask& mask,
                                 Connectivity connectivity = Connectivity::kEight);

/// Square structuring element of side 2*radius+1, clipped at the borders.
BinaryMask dilate(const BinaryMask& mask, int radius);

BinaryMask mask_combine(SetOp op, const BinaryMask& a, const BinaryMask& b);

bool is_subset(const BinaryMask& inner, const BinaryMask& outer);

PixelBox bounding_box(const BinaryMask& mask);

}  // namespace occkit::mask
