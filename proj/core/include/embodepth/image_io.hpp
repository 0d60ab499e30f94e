#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embodepth/depth_map.hpp"
#include "embodepth/grid.hpp"

namespace embodepth {

struct GrayImage {
  Grid<std::uint16_t> samples;
  int bit_depth = 8;  // 8 or 16
};

// Single-channel PNG only; anything else is a kFormat error.
GrayImage decode_png_gray(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png_gray(const Grid<std::uint16_t>& samples, int bit_depth);

std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes);

GrayImage read_png_gray(const std::string& path);
void write_png_gray(const std::string& path, const Grid<std::uint16_t>& samples, int bit_depth);

// 16-bit PNG depth: value = round(depth_m * 256), 0 = invalid or sky.
constexpr double kPngDepthScale = 256.0;
std::vector<std::uint8_t> encode_depth_png16(const DepthMap& depth);
DepthMap decode_depth_png16(std::span<const std::uint8_t> bytes);

// Raw float32 little-endian: u32 width, u32 height, then width*height floats
// in row-major order. 0 = invalid, +inf = sky.
std::vector<std::uint8_t> encode_depth_f32(const DepthMap& depth);
DepthMap decode_depth_f32(std::span<const std::uint8_t> bytes);

void write_depth_png16(const std::string& path, const DepthMap& depth);
void write_depth_f32(const std::string& path, const DepthMap& depth);
// Dispatches on the extension (.png or .f32).
DepthMap read_depth_file(const std::string& path);

}  // namespace embodepth
