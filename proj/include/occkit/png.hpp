#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace occkit::io {

/// Decoded PNG samples, interleaved per pixel, row-major. 8-bit files
/// hold values 0..255, 16-bit files 0..65535.
struct RasterImage {
    int height = 0;
    int width = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint16_t> samples;

    std::uint16_t at(int row, int col, int channel = 0) const {
        return samples[(static_cast<std::size_t>(row) * width + col) * channels + channel];
    }
};

/// Reads any PNG; palette images are expanded to RGB, sub-byte grays to 8 bit.
RasterImage read_png(const std::filesystem::path& path);

/// Writes 1-channel (gray) or 3-channel (RGB) images at 8 or 16 bits.
void write_png(const std::filesystem::path& path, const RasterImage& image);

}  // namespace occkit::io
