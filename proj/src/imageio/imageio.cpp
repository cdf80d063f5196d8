#include "wavefuse/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "wavefuse/error.hpp"

namespace wavefuse::imageio {

namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) {
    throw IoError("cannot open '" + path.string() + "' for " +
                  (mode[0] == 'r' ? "reading" : "writing"));
  }
  return f;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

std::size_t pgm_number(std::istream& in, const std::filesystem::path& path, const char* field) {
  const std::string tok = pgm_token(in);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit)) {
    throw FormatError("PGM '" + path.string() + "': bad " + field + " field '" + tok + "'");
  }
  return std::stoul(tok);
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  if (pgm_token(in) != "P5") {
    throw FormatError("PGM '" + path.string() + "': only binary P5 is supported");
  }
  const std::size_t w = pgm_number(in, path, "width");
  const std::size_t h = pgm_number(in, path, "height");
  const std::size_t maxval = pgm_number(in, path, "maxval");
  if (w == 0 || h == 0) throw FormatError("PGM '" + path.string() + "': zero dimension");
  if (maxval != 255) {
    throw FormatError("PGM '" + path.string() + "': maxval " + std::to_string(maxval) +
                      " unsupported (8-bit, maxval 255 only)");
  }
  std::vector<unsigned char> raster(w * h);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (static_cast<std::size_t>(in.gcount()) != raster.size()) {
    throw FormatError("PGM '" + path.string() + "': truncated raster");
  }
  GrayImage img(w, h);
  for (std::size_t i = 0; i < raster.size(); ++i) img.pixels[i] = raster[i] / 255.0;
  return img;
}

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

GrayImage load_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw FormatError("PNG: cannot allocate decoder");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw FormatError("PNG: cannot allocate decoder");

  // Everything touched after setjmp lives in plain storage declared before it.
  png_uint_32 w = 0, h = 0;
  int bit_depth = 0, color_type = 0;
  std::vector<unsigned char> raster;
  std::vector<png_bytep> rows;
  bool bad_depth = false;
  if (setjmp(png_jmpbuf(g.png))) {
    throw FormatError("PNG '" + path.string() + "': decode failed");
  }
  png_init_io(g.png, f.get());
  png_read_info(g.png, g.info);
  png_get_IHDR(g.png, g.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (bit_depth != 8) {
    bad_depth = true;
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(g.png);
    png_read_update_info(g.png, g.info);
    const std::size_t channels = png_get_channels(g.png, g.info);
    const std::size_t stride = png_get_rowbytes(g.png, g.info);
    raster.resize(stride * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + y * stride;
    png_read_image(g.png, rows.data());
    png_read_end(g.png, nullptr);

    GrayImage img(w, h);
    for (std::size_t y = 0; y < h; ++y) {
      const unsigned char* r = rows[y];
      for (std::size_t x = 0; x < w; ++x) {
        if (channels == 1) {
          img.at(x, y) = r[x] / 255.0;
        } else {
          const unsigned char* p = r + x * channels;
          img.at(x, y) = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
        }
      }
    }
    return img;
  }
  if (bad_depth) {
    throw FormatError("PNG '" + path.string() + "': bit depth " + std::to_string(bit_depth) +
                      " unsupported (8-bit only)");
  }
  return {};
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> raster(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), raster.begin(), quantize);
  out.write(reinterpret_cast<const char*>(raster.data()),
            static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
  FilePtr f = open_file(path, "wb");
  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw IoError("PNG: cannot allocate encoder");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("PNG: cannot allocate encoder");

  std::vector<unsigned char> raster(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), raster.begin(), quantize);
  std::vector<png_bytep> rows(image.height);
  for (std::size_t y = 0; y < image.height; ++y) rows[y] = raster.data() + y * image.width;

  if (setjmp(png_jmpbuf(g.png))) {
    throw IoError("PNG '" + path.string() + "': encode failed");
  }
  png_init_io(g.png, f.get());
  png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(g.png, g.info);
  png_write_image(g.png, rows.data());
  png_write_end(g.png, nullptr);
}

bool has_png_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png";
}

}  // namespace

GrayImage::GrayImage(std::size_t w, std::size_t h, std::vector<double> values)
    : width(w), height(h), pixels(std::move(values)) {
  if (pixels.size() != w * h) {
    throw DimensionError("image " + std::to_string(w) + "x" + std::to_string(h) + " given " +
                         std::to_string(pixels.size()) + " pixels");
  }
}

unsigned char quantize(double p) noexcept {
  const double c = std::clamp(p, 0.0, 1.0);
  return static_cast<unsigned char>(std::floor(c * 255.0 + 0.5));
}

GrayImage load_grayscale(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("image file '" + path.string() + "' does not exist");
  }
  std::array<unsigned char, 8> magic{};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  }
  if (magic[0] == 'P' && magic[1] == '5') return load_pgm(path);
  if (png_sig_cmp(magic.data(), 0, magic.size()) == 0) return load_png(path);
  if (magic[0] == 'P' && magic[1] >= '1' && magic[1] <= '7') {
    throw FormatError("'" + path.string() + "': netpbm format P" + std::string(1, magic[1]) +
                      " unsupported (binary P5 only)");
  }
  throw FormatError("'" + path.string() + "': unrecognized image format (expected PGM P5 or PNG)");
}

void save_grayscale(const GrayImage& image, const std::filesystem::path& path) {
  if (image.width == 0 || image.height == 0 || image.pixels.size() != image.width * image.height) {
    throw ArgumentError("save_grayscale: image has invalid dimensions");
  }
  if (has_png_extension(path)) {
    save_png(image, path);
  } else {
    save_pgm(image, path);
  }
}

GrayImage resize_bilinear(const GrayImage& image, std::size_t new_width, std::size_t new_height) {
  if (new_width == 0 || new_height == 0) {
    throw ArgumentError("resize_bilinear: target dimensions must be positive, got " +
                        std::to_string(new_width) + "x" + std::to_string(new_height));
  }
  if (image.width == 0 || image.height == 0) {
    throw ArgumentError("resize_bilinear: source image is empty");
  }
  if (new_width == image.width && new_height == image.height) return image;

  const double sx = static_cast<double>(image.width) / new_width;
  const double sy = static_cast<double>(image.height) / new_height;
  const double max_x = static_cast<double>(image.width - 1);
  const double max_y = static_cast<double>(image.height - 1);
  GrayImage out(new_width, new_height);
  for (std::size_t y = 0; y < new_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, max_y);
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double ty = fy - y0;
    for (std::size_t x = 0; x < new_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, max_x);
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1);
      const double tx = fx - x0;
      const double top = (1.0 - tx) * image.at(x0, y0) + tx * image.at(x1, y0);
      const double bottom = (1.0 - tx) * image.at(x0, y1) + tx * image.at(x1, y1);
      out.at(x, y) = std::clamp((1.0 - ty) * top + ty * bottom, 0.0, 1.0);
    }
  }
  return out;
}

Tensor to_tensor(const GrayImage& image) {
  return Tensor(Shape{1, image.height, image.width}, image.pixels);
}

GrayImage from_tensor(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != 1) {
    throw DimensionError("from_tensor expects [1,H,W], got " + shape_to_string(t.shape()));
  }
  GrayImage img(t.dim(2), t.dim(1));
  for (std::size_t i = 0; i < t.size(); ++i) img.pixels[i] = std::clamp(t[i], 0.0, 1.0);
  return img;
}

Matrix to_matrix(const GrayImage& image) {
  return Matrix(image.height, image.width, image.pixels);
}

GrayImage from_matrix(const Matrix& m) {
  GrayImage img(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.size(); ++i) img.pixels[i] = std::clamp(m.values()[i], 0.0, 1.0);
  return img;
}

}  // namespace wavefuse::imageio
