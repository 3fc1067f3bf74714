#include "tenprox/harness.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include <png.h>

namespace tenprox {

namespace {

std::string lower_extension(const std::string& path)
{
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = char(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

DenseTensor from_bytes(std::size_t h, std::size_t w, std::size_t c,
                       const std::vector<unsigned char>& bytes)
{
    DenseTensor img({h, w, c});
    auto d = img.data();
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = double(bytes[i]) / 255.0;
    return img;
}

std::vector<unsigned char> to_bytes(const DenseTensor& image)
{
    std::vector<unsigned char> bytes(image.size());
    const auto d = image.data();
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, d[i]));
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    return bytes;
}

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

DenseTensor load_png(const std::string& path)
{
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp)
        throw IoError("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png reader allocation failed for " + path);
    }
    std::vector<unsigned char> interleaved;
    std::size_t h = 0, w = 0, c = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    c = png_get_channels(png, info);
    if (c != 1 && c != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported channel count in " + path);
    }
    interleaved.resize(h * w * c);
    std::vector<png_bytep> rows(h);
    for (std::size_t r = 0; r < h; ++r)
        rows[r] = interleaved.data() + r * w * c;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_bytes(h, w, c, interleaved);
}

void save_png(const DenseTensor& image, const std::string& path)
{
    const std::size_t h = image.shape()[0];
    const std::size_t w = image.shape()[1];
    const std::size_t c = image.shape()[2];
    const std::vector<unsigned char> bytes = to_bytes(image);

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp)
        throw IoError("cannot write image: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png writer allocation failed for " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (std::size_t r = 0; r < h; ++r)
        rows[r] = const_cast<png_bytep>(bytes.data() + r * w * c);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// binary PPM (P6) / PGM (P5)
DenseTensor load_pnm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6" && magic != "P5")
        throw IoError("unsupported PNM magic in " + path);
    auto next_token = [&in, &path]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError("truncated PNM header in " + path);
    };
    const std::size_t w = std::stoul(next_token());
    const std::size_t h = std::stoul(next_token());
    const std::size_t maxval = std::stoul(next_token());
    if (maxval != 255)
        throw IoError("only 8-bit PNM is supported: " + path);
    in.get(); // single whitespace after header
    const std::size_t c = (magic == "P6") ? 3 : 1;
    std::vector<unsigned char> bytes(h * w * c);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw IoError("truncated PNM payload in " + path);
    return from_bytes(h, w, c, bytes);
}

void save_pnm(const DenseTensor& image, const std::string& path)
{
    const std::size_t h = image.shape()[0];
    const std::size_t w = image.shape()[1];
    const std::size_t c = image.shape()[2];
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write image: " + path);
    out << (c == 3 ? "P6" : "P5") << "\n" << w << " " << h << "\n255\n";
    const std::vector<unsigned char> bytes = to_bytes(image);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("failed writing image payload: " + path);
}

void require_image_shape(const DenseTensor& image, const std::string& path)
{
    if (image.order() != 3 || (image.shape()[2] != 1 && image.shape()[2] != 3))
        throw DimensionError("save_image: expected height x width x {1,3}, got " +
                             shape_to_string(image.shape()) + " for " + path);
}

} // namespace

DenseTensor load_image(const std::string& path)
{
    const std::string ext = lower_extension(path);
    if (ext == "png")
        return load_png(path);
    if (ext == "ppm" || ext == "pgm" || ext == "pnm")
        return load_pnm(path);
    throw IoError("unsupported image format '" + ext + "': " + path);
}

void save_image(const DenseTensor& image, const std::string& path)
{
    require_image_shape(image, path);
    const std::string ext = lower_extension(path);
    if (ext == "png")
        return save_png(image, path);
    if (ext == "ppm" || ext == "pgm" || ext == "pnm")
        return save_pnm(image, path);
    throw IoError("unsupported image format '" + ext + "': " + path);
}

} // namespace tenprox
