#include "embodepth/image_io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <fmt/format.h>

namespace embodepth {
namespace {

struct MemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->bytes.size()) png_error(png, "truncated PNG data");
  std::memcpy(out, reader->bytes.data() + reader->offset, length);
  reader->offset += length;
}

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

struct ErrorSink {
  char message[256] = "unknown libpng error";
};

// libpng cannot unwind C++ exceptions; record the message and longjmp back
// to the guarded call, which rethrows as an Error.
[[noreturn]] void on_png_error(png_structp png, png_const_charp message) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  if (sink != nullptr) std::snprintf(sink->message, sizeof(sink->message), "%s", message);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// Owns the libpng read/write structs.
class PngReadHandle {
 public:
  explicit PngReadHandle(ErrorSink* sink) {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink, on_png_error, on_png_warning);
    if (png_ == nullptr) throw Error(ErrorCode::kFormat, "png_create_read_struct failed");
    info_ = png_create_info_struct(png_);
    if (info_ == nullptr) {
      png_destroy_read_struct(&png_, nullptr, nullptr);
      throw Error(ErrorCode::kFormat, "png_create_info_struct failed");
    }
  }
  ~PngReadHandle() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReadHandle(const PngReadHandle&) = delete;
  PngReadHandle& operator=(const PngReadHandle&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngWriteHandle {
 public:
  explicit PngWriteHandle(ErrorSink* sink) {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink, on_png_error, on_png_warning);
    if (png_ == nullptr) throw Error(ErrorCode::kFormat, "png_create_write_struct failed");
    info_ = png_create_info_struct(png_);
    if (info_ == nullptr) {
      png_destroy_write_struct(&png_, nullptr);
      throw Error(ErrorCode::kFormat, "png_create_info_struct failed");
    }
  }
  ~PngWriteHandle() { png_destroy_write_struct(&png_, &info_); }
  PngWriteHandle(const PngWriteHandle&) = delete;
  PngWriteHandle& operator=(const PngWriteHandle&) = delete;

  png_structp png() const { return png_; }
  png_infop info() const { return info_; }

 private:
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

// Only trivially destructible locals live in these frames, so longjmp out of
// libpng is well defined.
bool guarded_read_header(png_structp png, png_infop info, void* io, png_rw_ptr fn) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, io, fn);
  png_read_info(png, info);
  return true;
}

bool guarded_read_rows(png_structp png, png_infop info, bool swap16, png_bytep* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  if (swap16) png_set_swap(png);
  png_read_update_info(png, info);
  png_read_image(png, rows);
  return true;
}

bool guarded_write(png_structp png, png_infop info, void* io, png_uint_32 width,
                   png_uint_32 height, int bit_depth, png_bytep* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, io, write_to_vector, flush_noop);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

}  // namespace

GrayImage decode_png_gray(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kFormat, "not a PNG file");
  }
  ErrorSink sink;
  PngReadHandle handle(&sink);
  MemoryReader reader{bytes, 0};
  if (!guarded_read_header(handle.png(), handle.info(), &reader, read_from_memory)) {
    throw Error(ErrorCode::kFormat, std::string("PNG: ") + sink.message);
  }

  const auto width = png_get_image_width(handle.png(), handle.info());
  const auto height = png_get_image_height(handle.png(), handle.info());
  const int depth = png_get_bit_depth(handle.png(), handle.info());
  const int color = png_get_color_type(handle.png(), handle.info());
  if (color != PNG_COLOR_TYPE_GRAY) {
    throw Error(ErrorCode::kFormat, "expected a single-channel grayscale PNG");
  }
  if (depth != 8 && depth != 16) {
    throw Error(ErrorCode::kFormat, fmt::format("unsupported PNG bit depth {}", depth));
  }
  if (width == 0 || height == 0) throw Error(ErrorCode::kFormat, "PNG has zero dimension");
  if (png_get_interlace_type(handle.png(), handle.info()) != PNG_INTERLACE_NONE) {
    throw Error(ErrorCode::kFormat, "interlaced PNG is not supported");
  }

  const std::size_t bpp = static_cast<std::size_t>(depth / 8);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * bpp;
  std::vector<std::uint8_t> pixels(row_bytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * row_bytes;
  const bool swap16 = depth == 16 && std::endian::native == std::endian::little;
  if (!guarded_read_rows(handle.png(), handle.info(), swap16, rows.data())) {
    throw Error(ErrorCode::kFormat, std::string("PNG: ") + sink.message);
  }

  GrayImage image{Grid<std::uint16_t>(static_cast<int>(width), static_cast<int>(height)), depth};
  auto out = image.samples.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (depth == 8) {
      out[i] = pixels[i];
    } else {
      std::memcpy(&out[i], pixels.data() + 2 * i, 2);
    }
  }
  return image;
}

std::vector<std::uint8_t> encode_png_gray(const Grid<std::uint16_t>& samples, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorCode::kFormat, "PNG bit depth must be 8 or 16");
  }
  if (samples.empty()) throw Error(ErrorCode::kFormat, "cannot encode an empty image");

  const std::size_t bpp = static_cast<std::size_t>(bit_depth / 8);
  const std::size_t row_bytes = static_cast<std::size_t>(samples.width()) * bpp;
  std::vector<std::uint8_t> pixels(row_bytes * static_cast<std::size_t>(samples.height()));
  std::vector<png_bytep> rows(static_cast<std::size_t>(samples.height()));
  for (int y = 0; y < samples.height(); ++y) {
    std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * row_bytes;
    rows[static_cast<std::size_t>(y)] = row;
    for (int x = 0; x < samples.width(); ++x) {
      const std::uint16_t v = samples(x, y);
      if (bit_depth == 8) {
        if (v > 255) throw Error(ErrorCode::kFormat, "sample does not fit in 8 bits");
        row[x] = static_cast<std::uint8_t>(v);
      } else {
        row[2 * x] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
        row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xff);
      }
    }
  }

  std::vector<std::uint8_t> out;
  ErrorSink sink;
  PngWriteHandle handle(&sink);
  if (!guarded_write(handle.png(), handle.info(), &out,
                     static_cast<png_uint_32>(samples.width()),
                     static_cast<png_uint_32>(samples.height()), bit_depth, rows.data())) {
    throw Error(ErrorCode::kFormat, std::string("PNG: ") + sink.message);
  }
  return out;
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path);
}

GrayImage read_png_gray(const std::string& path) {
  try {
    return decode_png_gray(read_binary_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_png_gray(const std::string& path, const Grid<std::uint16_t>& samples, int bit_depth) {
  write_binary_file(path, encode_png_gray(samples, bit_depth));
}

std::vector<std::uint8_t> encode_depth_png16(const DepthMap& depth) {
  Grid<std::uint16_t> samples(depth.width(), depth.height(), 0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      const double scaled = std::round(static_cast<double>(depth.at(x, y)) * kPngDepthScale);
      samples(x, y) = static_cast<std::uint16_t>(std::clamp(scaled, 1.0, 65535.0));
    }
  }
  return encode_png_gray(samples, 16);
}

DepthMap decode_depth_png16(std::span<const std::uint8_t> bytes) {
  const GrayImage image = decode_png_gray(bytes);
  if (image.bit_depth != 16) throw Error(ErrorCode::kFormat, "depth PNG must be 16-bit");
  DepthMap depth(image.samples.width(), image.samples.height());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const auto v = image.samples(x, y);
      if (v > 0) depth.set(x, y, static_cast<float>(v / kPngDepthScale));
    }
  }
  return depth;
}

std::vector<std::uint8_t> encode_depth_f32(const DepthMap& depth) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * static_cast<std::size_t>(depth.width()) * depth.height());
  put_u32(out, static_cast<std::uint32_t>(depth.width()));
  put_u32(out, static_cast<std::uint32_t>(depth.height()));
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) put_u32(out, std::bit_cast<std::uint32_t>(depth.encoded(x, y)));
  }
  return out;
}

DepthMap decode_depth_f32(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw Error(ErrorCode::kFormat, "f32 depth: missing header");
  const std::uint32_t width = get_u32(bytes, 0);
  const std::uint32_t height = get_u32(bytes, 4);
  const std::uint64_t expected = 8 + 4ull * width * height;
  if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20) ||
      bytes.size() != expected) {
    throw Error(ErrorCode::kFormat, fmt::format("f32 depth: header {}x{} does not match {} bytes",
                                                width, height, bytes.size()));
  }
  DepthMap depth(static_cast<int>(width), static_cast<int>(height));
  std::size_t at = 8;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x, at += 4) {
      const float v = std::bit_cast<float>(get_u32(bytes, at));
      if (v == 0.0f) continue;
      if (std::isinf(v) && v > 0) {
        depth.set_sky(x, y);
      } else if (std::isfinite(v) && v > 0) {
        depth.set(x, y, v);
      } else {
        throw Error(ErrorCode::kFormat,
                    fmt::format("f32 depth: invalid value {} at ({}, {})", v, x, y));
      }
    }
  }
  return depth;
}

void write_depth_png16(const std::string& path, const DepthMap& depth) {
  write_binary_file(path, encode_depth_png16(depth));
}

void write_depth_f32(const std::string& path, const DepthMap& depth) {
  write_binary_file(path, encode_depth_f32(depth));
}

DepthMap read_depth_file(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  const auto bytes = read_binary_file(path);
  try {
    if (ext == ".png") return decode_depth_png16(bytes);
    if (ext == ".f32") return decode_depth_f32(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
  throw Error(ErrorCode::kFormat, path + ": unsupported depth file extension '" + ext + "'");
}

}  // namespace embodepth
