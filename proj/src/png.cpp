#include "occkit/png.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "occkit/errors.hpp"

namespace occkit::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void on_png_error(png_structp png, png_const_charp message) {
    auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
    if (slot) *slot = message;
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

RasterImage read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) throw IoError("cannot open " + path.string());

    png_byte header[8];
    if (std::fread(header, 1, sizeof header, file.get()) != sizeof header ||
        png_sig_cmp(header, 0, sizeof header) != 0) {
        throw ParseError(path.string() + ": not a PNG file");
    }

    std::string message;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
    if (!png) throw IoError("libpng: cannot allocate read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng: cannot allocate info struct");
    }

    RasterImage image;
    std::vector<png_bytep> rows;
    std::vector<png_byte> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError(path.string() + ": " + message);
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, sizeof header);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (bit_depth == 16) png_set_swap(png);  // little-endian host order
    png_read_update_info(png, info);

    image.width = static_cast<int>(png_get_image_width(png, info));
    image.height = static_cast<int>(png_get_image_height(png, info));
    image.channels = png_get_channels(png, info);
    image.bit_depth = png_get_bit_depth(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * image.height);
    rows.resize(image.height);
    for (int r = 0; r < image.height; ++r) rows[r] = buffer.data() + row_bytes * r;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t n = static_cast<std::size_t>(image.width) * image.height * image.channels;
    image.samples.resize(n);
    if (image.bit_depth == 16) {
        for (std::size_t i = 0; i < n; ++i) {
            image.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) image.samples[i] = buffer[i];
    }
    return image;
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
    if (image.channels != 1 && image.channels != 3) {
        throw ValidationError("write_png: only 1 or 3 channels are supported");
    }
    if (image.bit_depth != 8 && image.bit_depth != 16) {
        throw ValidationError("write_png: bit depth must be 8 or 16");
    }
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw IoError("cannot write " + path.string());

    std::string message;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
    if (!png) throw IoError("libpng: cannot allocate write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng: cannot allocate info struct");
    }

    const int bytes = image.bit_depth / 8;
    const std::size_t row_bytes = static_cast<std::size_t>(image.width) * image.channels * bytes;
    std::vector<png_byte> buffer(row_bytes * image.height);
    for (std::size_t i = 0; i < image.samples.size(); ++i) {
        if (bytes == 2) {
            buffer[2 * i] = static_cast<png_byte>(image.samples[i] >> 8);  // big-endian on disk
            buffer[2 * i + 1] = static_cast<png_byte>(image.samples[i] & 0xff);
        } else {
            buffer[i] = static_cast<png_byte>(image.samples[i]);
        }
    }
    std::vector<png_bytep> rows(image.height);
    for (int r = 0; r < image.height; ++r) rows[r] = buffer.data() + row_bytes * r;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, image.width, image.height, image.bit_depth,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace occkit::io
