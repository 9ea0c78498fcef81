#include "mister/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace mister {

namespace {

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) break;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (token.empty()) throw Error("malformed PGM header in " + describe(path) + ": unexpected end of file");
  return token;
}

int parse_positive(const std::string& token, const char* field, const std::filesystem::path& path) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || value < 1 || value > (1L << 30)) {
    throw Error("malformed PGM header in " + describe(path) + ": invalid " + field + " '" + token + "'");
  }
  return static_cast<int>(value);
}

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + describe(path));
  const std::string magic = next_token(in, path);
  if (magic == "P6" || magic == "P3") throw Error("unsupported: color PGM/PPM in " + describe(path));
  if (magic == "P2") throw Error("unsupported: ASCII PGM (P2) in " + describe(path) + ", expected binary P5");
  if (magic != "P5") throw Error("malformed PGM header in " + describe(path) + ": bad magic '" + magic + "'");
  const int w = parse_positive(next_token(in, path), "width", path);
  const int h = parse_positive(next_token(in, path), "height", path);
  const int maxval = parse_positive(next_token(in, path), "maxval", path);
  if (maxval > 255) {
    throw Error("unsupported bit depth in " + describe(path) + ": maxval " + std::to_string(maxval) +
                " needs 16-bit samples, only 8-bit is supported");
  }
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw Error("truncated PGM payload in " + describe(path) + ": expected " + std::to_string(bytes.size()) +
                " bytes, got " + std::to_string(in.gcount()));
  }
  Image img(h, w);
  std::transform(bytes.begin(), bytes.end(), img.data(), [](unsigned char b) { return double(b); });
  return img;
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + describe(path));
  out << "P5\n" << width(img) << ' ' << height(img) << "\n255\n";
  std::vector<unsigned char> bytes(static_cast<std::size_t>(img.size()));
  std::transform(img.data(), img.data() + img.size(), bytes.begin(), quantize);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + describe(path));
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  *text = message;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

Image load_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error("cannot open " + describe(path));
  std::string failure;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &failure, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng initialisation failed");
  }
  Image img;
  std::string rejection;
  std::vector<unsigned char> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("malformed PNG " + describe(path) + ": " + failure);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto w = png_get_image_width(png, info);
  const auto h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    rejection = "unsupported: color PNG in " + describe(path) + ", expected 8-bit grayscale";
  } else if (depth != 8) {
    rejection = "unsupported bit depth in " + describe(path) + ": " + std::to_string(depth) +
                "-bit PNG, expected 8-bit";
  } else {
    bytes.resize(static_cast<std::size_t>(w) * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * w;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!rejection.empty()) throw Error(rejection);
  img.resize(h, w);
  std::transform(bytes.begin(), bytes.end(), img.data(), [](unsigned char b) { return double(b); });
  return img;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error("cannot write " + describe(path));
  std::string failure;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &failure, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng initialisation failed");
  }
  std::vector<unsigned char> bytes(static_cast<std::size_t>(img.size()));
  std::transform(img.data(), img.data() + img.size(), bytes.begin(), quantize);
  std::vector<png_bytep> rows(height(img));
  for (int y = 0; y < height(img); ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * width(img);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("failed writing PNG " + describe(path) + ": " + failure);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width(img), height(img), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

unsigned char quantize(double value) {
  const double rounded = std::round(value);
  return static_cast<unsigned char>(std::clamp(rounded, 0.0, 255.0));
}

ImageFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return ImageFormat::pgm;
  if (ext == ".png") return ImageFormat::png;
  throw Error("unsupported image extension '" + ext + "' for " + describe(path) + " (expected .pgm or .png)");
}

Image load_image(const std::filesystem::path& path, ImageFormat format) {
  return format == ImageFormat::pgm ? load_pgm(path) : load_png(path);
}

Image load_image(const std::filesystem::path& path) { return load_image(path, format_from_path(path)); }

void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format) {
  require_valid(img, "save_image");
  if (format == ImageFormat::pgm) {
    save_pgm(img, path);
  } else {
    save_png(img, path);
  }
}

void save_image(const Image& img, const std::filesystem::path& path) {
  save_image(img, path, format_from_path(path));
}

}  // namespace mister
