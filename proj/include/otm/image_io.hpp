#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "otm/field.hpp"

namespace otm {

struct RawImage {
  int width = 0;
  int height = 0;
  int max_value = 255;            // 255 or 65535
  std::vector<uint16_t> pixels;   // row-major, top row first
};

/// Reads PGM (P2/P5) or grayscale PNG, 8 or 16 bit.
RawImage read_raw_image(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const RawImage& image,
               bool binary = true);
void write_png_gray8(const std::filesystem::path& path, const RawImage& image);

/// Loads an image as a nodal intensity field scaled to [0,1]. Dimensions
/// must be (2^L+1) x (2^L+1) unless `resample_level >= 0`, in which case the
/// image is bilinearly resampled onto that grid level. Pixel (row, col) maps
/// to node (ix=col, iy=row).
ImageField load_image(const std::filesystem::path& path, Boundary boundary,
                      int resample_level = -1);

enum class SaveScaling {
  Clamp,    // clamp to [0,1], scale by 255, round to nearest
  Rescale,  // map [min,max] linearly onto [0,255]
};

void save_image(const ImageField& field, const std::filesystem::path& path,
                SaveScaling scaling = SaveScaling::Clamp);

}  // namespace otm
