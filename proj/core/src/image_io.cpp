#include <png.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "phsar/error.hpp"
#include "phsar/image.hpp"

namespace phsar {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Decoded PNG in its native layout (after palette / low-bit expansion).
struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 gray, 3 RGB
  int bitDepth = 0;  // 8 or 16
  std::vector<unsigned char> bytes;
  std::string error;
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* raw = static_cast<RawPng*>(png_get_error_ptr(png));
  if (raw != nullptr) raw->error = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

// Only trivially destructible locals live across setjmp here.
bool decode_png(std::FILE* file, RawPng& raw) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &raw, png_error_fn, png_warning_fn);
  if (png == nullptr) {
    raw.error = "out of memory";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    raw.error = "out of memory";
    return false;
  }
  png_bytepp rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::free(rows);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);

  const png_byte colorType = png_get_color_type(png, info);
  if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (colorType == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (png_get_bit_depth(png, info) == 16) png_set_swap(png);  // native little-endian order
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bitDepth = png_get_bit_depth(png, info);
  const std::size_t rowBytes = png_get_rowbytes(png, info);
  raw.bytes.resize(rowBytes * static_cast<std::size_t>(raw.height));
  rows = static_cast<png_bytepp>(std::malloc(sizeof(png_bytep) * static_cast<std::size_t>(raw.height)));
  if (rows == nullptr) png_error(png, "out of memory");
  for (int y = 0; y < raw.height; ++y) rows[y] = raw.bytes.data() + rowBytes * static_cast<std::size_t>(y);
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  std::free(rows);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

GrayImage load_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("'" + path.string() + "' is not a PNG file");
  }
  std::rewind(file.get());
  RawPng raw;
  if (!decode_png(file.get(), raw)) throw IoError("failed to decode PNG '" + path.string() + "': " + raw.error);
  if (raw.channels != 1 && raw.channels != 3) {
    throw FormatError("unsupported PNG channel layout (" + std::to_string(raw.channels) + " channels) in '" +
                      path.string() + "'");
  }
  const double maxValue = raw.bitDepth == 16 ? 65535.0 : 255.0;
  std::vector<double> samples(static_cast<std::size_t>(raw.width) * raw.height);
  const std::size_t n = samples.size();
  auto sampleAt = [&](std::size_t k) -> double {
    if (raw.bitDepth == 16) {
      std::uint16_t v;
      std::memcpy(&v, raw.bytes.data() + 2 * k, 2);
      return v;
    }
    return raw.bytes[k];
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (raw.channels == 1) {
      samples[i] = sampleAt(i) / maxValue;
    } else {
      samples[i] = (kLumaR * sampleAt(3 * i) + kLumaG * sampleAt(3 * i + 1) + kLumaB * sampleAt(3 * i + 2)) / maxValue;
    }
  }
  return GrayImage(raw.width, raw.height, std::move(samples));
}

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(std::istream& in) {
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
}

long read_pnm_int(std::istream& in, const std::filesystem::path& path) {
  skip_pnm_space(in);
  long v = -1;
  if (!(in >> v) || v < 0) throw FormatError("malformed PGM header in '" + path.string() + "'");
  return v;
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw FormatError("'" + path.string() + "' is not a binary PGM (P5) file");
  }
  const long width = read_pnm_int(in, path);
  const long height = read_pnm_int(in, path);
  const long maxval = read_pnm_int(in, path);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    throw FormatError("unsupported PGM geometry or maxval in '" + path.string() + "'");
  }
  in.get();  // single whitespace before the raster
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t bytesPerSample = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raster(n * bytesPerSample);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (static_cast<std::size_t>(in.gcount()) != raster.size()) {
    throw IoError("unexpected end of file in '" + path.string() + "'");
  }
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bytesPerSample == 2 ? (static_cast<unsigned>(raster[2 * i]) << 8) | raster[2 * i + 1] : raster[i];
    samples[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(samples));
}

std::vector<unsigned char> quantize(const GrayImage& img) {
  std::vector<unsigned char> bytes(img.size());
  std::transform(img.samples().begin(), img.samples().end(), bytes.begin(), quantize_sample);
  return bytes;
}

void save_png(const GrayImage& img, const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write '" + path.string() + "': " + std::strerror(errno));
  std::vector<unsigned char> bytes = quantize(img);
  RawPng status;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &status, png_error_fn, png_warning_fn);
  if (png == nullptr) throw IoError("out of memory writing '" + path.string() + "'");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("out of memory writing '" + path.string() + "'");
  }
  volatile bool ok = false;
  if (setjmp(png_jmpbuf(png)) == 0) {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height(); ++y) {
      png_write_row(png, bytes.data() + static_cast<std::size_t>(y) * img.width());
    }
    png_write_end(png, nullptr);
    ok = true;
  }
  png_destroy_write_struct(&png, &info);
  if (!ok) throw IoError("failed to write PNG '" + path.string() + "': " + status.error);
  if (std::fflush(file.get()) != 0) throw IoError("failed to write '" + path.string() + "'");
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  const std::vector<unsigned char> bytes = quantize(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed to write '" + path.string() + "'");
}

}  // namespace

unsigned char quantize_sample(double v) {
  return static_cast<unsigned char>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

GrayImage load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw IoError("cannot read '" + path.string() + "': no such file");
  const std::string ext = lower_extension(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm") return load_pgm(path);
  throw FormatError("unsupported image format '" + ext + "' for '" + path.string() + "' (expected .png or .pgm)");
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
  if (img.empty()) throw ArgumentError("cannot save an empty image");
  const std::string ext = lower_extension(path);
  if (ext == ".png") return save_png(img, path);
  if (ext == ".pgm") return save_pgm(img, path);
  throw FormatError("unsupported output format '" + ext + "' for '" + path.string() + "' (expected .png or .pgm)");
}

}  // namespace phsar
