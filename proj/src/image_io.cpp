#include "otm/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace otm {

namespace {

int skip_pgm_whitespace(std::istream& in) {
  int c = in.get();
  while (c == '#' || std::isspace(c)) {
    if (c == '#')
      while (c != '\n' && c != EOF) c = in.get();
    c = in.get();
  }
  return c;
}

int read_pgm_int(std::istream& in) {
  int c = skip_pgm_whitespace(in);
  if (!std::isdigit(c)) throw std::runtime_error("pgm: malformed header");
  int value = 0;
  while (std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

RawImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[2];
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw std::runtime_error("pgm: unsupported magic in " + path.string());
  const bool binary = magic[1] == '5';
  RawImage img;
  img.width = read_pgm_int(in);
  img.height = read_pgm_int(in);
  img.max_value = read_pgm_int(in);
  if (img.max_value <= 0 || img.max_value > 65535)
    throw std::runtime_error("pgm: bad max value");
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  if (binary) {
    const int bytes = img.max_value > 255 ? 2 : 1;
    std::vector<unsigned char> buf(img.pixels.size() * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (!in) throw std::runtime_error("pgm: truncated data");
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
      img.pixels[i] = bytes == 1
                          ? buf[i]
                          : static_cast<uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
  } else {
    for (auto& p : img.pixels) p = static_cast<uint16_t>(read_pgm_int(in));
  }
  return img;
}

RawImage read_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw std::runtime_error("cannot open " + path.string());
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("png: read failure in " + path.string());
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE || (color_type & PNG_COLOR_MASK_COLOR)) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("png: only grayscale images are supported");
  }
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  if (bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    bit_depth = 8;
  }
  png_read_update_info(png, info);

  RawImage img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.max_value = bit_depth == 16 ? 65535 : 255;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  const int bytes = bit_depth == 16 ? 2 : 1;
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * bytes);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < img.width; ++x)
      img.pixels[static_cast<std::size_t>(y) * img.width + x] =
          bytes == 1 ? row[x]
                     : static_cast<uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

}  // namespace

RawImage read_raw_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open " + path.string());
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5'))
    return read_pgm(path);
  return read_png(path);
}

void write_pgm(const std::filesystem::path& path, const RawImage& image,
               bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (binary ? "P5" : "P2") << "\n"
      << image.width << " " << image.height << "\n"
      << image.max_value << "\n";
  if (binary) {
    for (uint16_t p : image.pixels) {
      if (image.max_value > 255) {
        const unsigned char hi = p >> 8, lo = p & 0xff;
        out.put(hi).put(lo);
      } else {
        out.put(static_cast<char>(p & 0xff));
      }
    }
  } else {
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
      out << image.pixels[i]
          << ((i + 1) % image.width == 0 ? '\n' : ' ');
  }
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

void write_png_gray8(const std::filesystem::path& path, const RawImage& image) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write " + path.string());
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("png: write failure on " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x)
      row[x] = static_cast<unsigned char>(
          image.pixels[static_cast<std::size_t>(y) * image.width + x] & 0xff);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

namespace {

bool is_power_of_two_plus_one(int n) {
  const int m = n - 1;
  return m >= 1 && (m & (m - 1)) == 0;
}

int level_of_side(int n) {
  int level = 0, m = n - 1;
  while (m > 1) {
    m >>= 1;
    ++level;
  }
  return level;
}

}  // namespace

ImageField load_image(const std::filesystem::path& path, Boundary boundary,
                      int resample_level) {
  const RawImage raw = read_raw_image(path);
  const double scale = 1.0 / raw.max_value;

  if (resample_level < 0) {
    if (raw.width != raw.height || !is_power_of_two_plus_one(raw.width))
      throw std::runtime_error(
          path.string() +
          ": dimensions must be (2^L+1)x(2^L+1); pass --resample to resize");
    const Grid grid(level_of_side(raw.width), boundary);
    ImageField field(grid);
    for (int node = 0; node < grid.node_count(); ++node)
      field[node] = raw.pixels[node] * scale;
    field.sync_periodic();
    return field;
  }

  const Grid grid(resample_level, boundary);
  const int n = grid.nodes_per_side();
  ImageField field(grid);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      // Bilinear sample of the pixel lattice at the node position.
      const double px = ix / static_cast<double>(n - 1) * (raw.width - 1);
      const double py = iy / static_cast<double>(n - 1) * (raw.height - 1);
      const int x0 = std::min(static_cast<int>(px), raw.width - 2);
      const int y0 = std::min(static_cast<int>(py), raw.height - 2);
      const double fx = px - x0, fy = py - y0;
      auto pix = [&](int x, int y) {
        return raw.pixels[static_cast<std::size_t>(y) * raw.width + x] * scale;
      };
      field[grid.node_index(ix, iy)] =
          (1 - fx) * (1 - fy) * pix(x0, y0) + fx * (1 - fy) * pix(x0 + 1, y0) +
          (1 - fx) * fy * pix(x0, y0 + 1) + fx * fy * pix(x0 + 1, y0 + 1);
    }
  field.sync_periodic();
  return field;
}

void save_image(const ImageField& field, const std::filesystem::path& path,
                SaveScaling scaling) {
  const Grid& grid = field.grid();
  const int n = grid.nodes_per_side();
  RawImage img;
  img.width = n;
  img.height = n;
  img.max_value = 255;
  img.pixels.resize(static_cast<std::size_t>(n) * n);

  double lo = 0.0, hi = 1.0;
  if (scaling == SaveScaling::Rescale) {
    lo = field.values()[0];
    hi = lo;
    for (double v : field.values()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo < 1e-30) hi = lo + 1.0;
  }
  for (int node = 0; node < grid.node_count(); ++node) {
    double v = (field[node] - lo) / (hi - lo);
    v = std::min(std::max(v, 0.0), 1.0);
    img.pixels[node] = static_cast<uint16_t>(std::lround(v * 255.0));
  }
  if (path.extension() == ".pgm")
    write_pgm(path, img);
  else
    write_png_gray8(path, img);
}

}  // namespace otm
