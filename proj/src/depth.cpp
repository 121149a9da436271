#include "occkit/depth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "occkit/png.hpp"

namespace occkit::io {

std::optional<DepthConvention> parse_depth_convention(std::string_view text) {
    if (text == "larger-is-farther" || text == "farther") return DepthConvention::kLargerIsFarther;
    if (text == "larger-is-nearer" || text == "nearer") return DepthConvention::kLargerIsNearer;
    return std::nullopt;
}

const char* to_string(DepthConvention c) {
    return c == DepthConvention::kLargerIsFarther ? "larger-is-farther" : "larger-is-nearer";
}

DepthMap::DepthMap(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (height < 1 || width < 1) throw ValidationError("depth map dimensions must be >= 1");
    if (values_.size() != static_cast<std::size_t>(height) * width) {
        throw ValidationError("depth map holds " + std::to_string(values_.size()) +
                              " values, expected " + std::to_string(height * width));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw ValidationError("depth map contains a non-finite value");
    }
}

std::optional<double> DepthMap::mean_over(const mask::BinaryMask& region) const {
    if (region.height() != height_ || region.width() != width_) {
        throw mask::DimensionMismatch("depth map and mask sizes differ");
    }
    const auto bits = region.bits();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            sum += values_[i];
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

DepthMap DepthMap::resized(int height, int width) const {
    if (height == height_ && width == width_) return *this;
    std::vector<double> out(static_cast<std::size_t>(height) * width);
    for (int r = 0; r < height; ++r) {
        const int sr = std::min(height_ - 1, static_cast<int>((r + 0.5) * height_ / height));
        for (int c = 0; c < width; ++c) {
            const int sc = std::min(width_ - 1, static_cast<int>((c + 0.5) * width_ / width));
            out[static_cast<std::size_t>(r) * width + c] = at(sr, sc);
        }
    }
    return DepthMap(height, width, std::move(out));
}

DepthMap load_depth(const std::filesystem::path& path, DepthConvention convention, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ValidationError("depth scale must be a positive finite number");
    }
    const RasterImage raw = read_png(path);
    if (raw.channels != 1) {
        throw ParseError(path.string() + ": depth map must be single-channel, found " +
                         std::to_string(raw.channels) + " channels");
    }
    const double sign = convention == DepthConvention::kLargerIsNearer ? -1.0 : 1.0;
    std::vector<double> values(raw.samples.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = sign * scale * raw.samples[i];
    return DepthMap(raw.height, raw.width, std::move(values));
}

}  // namespace occkit::io
