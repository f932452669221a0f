#pragma once

#include "pg/core/image.hpp"

#include <filesystem>

namespace pg::img {

ImageU8 load_png_rgb(const std::filesystem::path& path);
PlaneU8 load_png_gray(const std::filesystem::path& path);
void save_png_rgb(const std::filesystem::path& path, const ImageU8& im);
void save_png_gray(const std::filesystem::path& path, const PlaneU8& plane);

}  // namespace pg::img
