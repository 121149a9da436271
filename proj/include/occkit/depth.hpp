#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "occkit/mask.hpp"

namespace occkit::io {

/// How the raw depth file orders values. Inverse-depth estimators produce
/// larger-is-nearer maps.
enum class DepthConvention { kLargerIsFarther, kLargerIsNearer };

std::optional<DepthConvention> parse_depth_convention(std::string_view text);
const char* to_string(DepthConvention c);

/// Per-pixel depth where a larger stored value is always farther away.
class DepthMap {
public:
    DepthMap(int height, int width, std::vector<double> values);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    double at(int row, int col) const noexcept {
        return values_[static_cast<std::size_t>(row) * width_ + col];
    }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Mean over the set pixels of `region`; nullopt when the region is empty.
    std::optional<double> mean_over(const mask::BinaryMask& region) const;

    /// Nearest-neighbour resample to a new size.
    DepthMap resized(int height, int width) const;

    template <typename F>
    DepthMap transformed(F&& f) const {
        std::vector<double> out(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) out[i] = f(values_[i]);
        return DepthMap(height_, width_, std::move(out));
    }

private:
    int height_;
    int width_;
    std::vector<double> values_;
};

/// Loads a single-channel 8/16-bit PNG. Raw values are multiplied by
/// `scale` (> 0) and negated under kLargerIsNearer. Multi-channel files
/// are rejected with ParseError.
DepthMap load_depth(const std::filesystem::path& path, DepthConvention convention,
                    double scale = 1.0);

}  // namespace occkit::io
