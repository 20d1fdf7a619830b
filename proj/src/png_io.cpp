#include "vxgan/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "vxgan/errors.hpp"

namespace vxgan {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; the message is kept for the exception.
struct ErrorSink {
  char message[256] = {};
};

void png_fail(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof sink->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

// Only trivially destructible locals live across setjmp here.
bool encode(std::FILE* f, const Gray8& img, ErrorSink* sink) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink, png_fail, png_warn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index y = 0; y < img.height; ++y) png_write_row(png, img.pixels.data() + y * img.width);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

// Returns 0 on success, 1 on libpng error, 2 when the image is not 8-bit gray.
int decode(std::FILE* f, Gray8* out, ErrorSink* sink) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink, png_fail, png_warn);
  if (!png) return 1;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return 1;
  }
  png_init_io(png, f);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    return 2;
  }
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->pixels.resize(static_cast<std::size_t>(out->width * out->height));
  for (Index y = 0; y < out->height; ++y) png_read_row(png, out->pixels.data() + y * out->width, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return 0;
}

}  // namespace

std::uint8_t quantize_gray(double v) {
  if (std::isnan(v)) v = 0.0;
  const double c = std::clamp(v, -kPngClamp, kPngClamp);
  return static_cast<std::uint8_t>(std::lround((c + kPngClamp) / (2.0 * kPngClamp) * 255.0));
}

Gray8 quantize(const Image& img) {
  Gray8 out{img.rows(), img.cols(), {}};
  out.pixels.reserve(static_cast<std::size_t>(img.size()));
  for (Index i = 0; i < img.size(); ++i) out.pixels.push_back(quantize_gray(img.data()[i]));
  return out;
}

void write_png(const std::filesystem::path& path, const Image& img) { write_png(path, quantize(img)); }

void write_png(const std::filesystem::path& path, const Gray8& img) {
  if (img.height < 1 || img.width < 1 || img.pixels.size() != static_cast<std::size_t>(img.height * img.width))
    throw ShapeMismatch("write_png: pixel buffer does not match extents");
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  ErrorSink sink;
  if (!encode(f.get(), img, &sink)) throw DataError(path.string() + ": png encoding failed: " + sink.message);
  if (std::fflush(f.get()) != 0) throw DataError("cannot write " + path.string());
}

Gray8 read_png(const std::filesystem::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DataError("cannot open " + path.string());
  ErrorSink sink;
  Gray8 out;
  switch (decode(f.get(), &out, &sink)) {
    case 0: return out;
    case 2: throw FormatError(path.string() + ": expected 8-bit grayscale");
    default: throw FormatError(path.string() + ": " + sink.message);
  }
}

}  // namespace vxgan
