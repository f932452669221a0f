#include "pg/core/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace pg::img {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

ImageU8 load_png_rgb(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    require(fp != nullptr, ErrorCode::IoError, "cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::IoError, "png read failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    ImageU8 im(static_cast<Index>(png_get_image_width(png, info)),
               static_cast<Index>(png_get_image_height(png, info)));
    std::vector<png_bytep> rows(static_cast<std::size_t>(im.height));
    for (Index y = 0; y < im.height; ++y)
        rows[static_cast<std::size_t>(y)] = im.data.data() + y * im.width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return im;
}

PlaneU8 load_png_gray(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    require(fp != nullptr, ErrorCode::IoError, "cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::IoError, "png read failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) png_set_rgb_to_gray(png, 1, -1, -1);
    png_read_update_info(png, info);

    PlaneU8 plane(static_cast<Index>(png_get_image_width(png, info)),
                  static_cast<Index>(png_get_image_height(png, info)));
    std::vector<png_bytep> rows(static_cast<std::size_t>(plane.height));
    for (Index y = 0; y < plane.height; ++y)
        rows[static_cast<std::size_t>(y)] = plane.data.data() + y * plane.width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return plane;
}

void save_png_rgb(const std::filesystem::path& path, const ImageU8& im) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    require(fp != nullptr, ErrorCode::IoError, "cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorCode::IoError, "png write failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(im.width),
                 static_cast<png_uint_32>(im.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<std::size_t>(im.height));
    for (Index y = 0; y < im.height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(im.data.data() + y * im.width * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_png_gray(const std::filesystem::path& path, const PlaneU8& plane) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    require(fp != nullptr, ErrorCode::IoError, "cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorCode::IoError, "png write failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(plane.width),
                 static_cast<png_uint_32>(plane.height), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<std::size_t>(plane.height));
    for (Index y = 0; y < plane.height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(plane.data.data() + y * plane.width);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace pg::img
