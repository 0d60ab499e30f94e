#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embodepth/grid.hpp"

namespace embodepth {

enum class Category : std::uint8_t { kRoad, kFlatGround, kVertical, kSky, kVoid };

std::string_view to_string(Category c);
Category parse_category(std::string_view text);

class CategorySet {
 public:
  constexpr CategorySet() = default;
  constexpr CategorySet(std::initializer_list<Category> cats) {
    for (auto c : cats) bits_ |= bit(c);
  }

  constexpr bool contains(Category c) const noexcept { return (bits_ & bit(c)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr CategorySet operator|(CategorySet o) const noexcept {
    CategorySet s;
    s.bits_ = bits_ | o.bits_;
    return s;
  }

  static constexpr CategorySet road() { return {Category::kRoad}; }
  static constexpr CategorySet ground() { return {Category::kRoad, Category::kFlatGround}; }

 private:
  static constexpr std::uint8_t bit(Category c) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c));
  }
  std::uint8_t bits_ = 0;
};

using LabelId = std::uint16_t;

struct ClassEntry {
  LabelId id = 0;
  std::string name;
  Category category = Category::kVoid;
};

// Maps dataset label ids to names and pipeline categories.
class ClassTable {
 public:
  ClassTable();

  void add(LabelId id, std::string name, Category category);
  const ClassEntry* find(LabelId id) const noexcept;
  const ClassEntry& at(LabelId id) const;
  bool contains(LabelId id) const noexcept { return find(id) != nullptr; }

  // O(1) lookup for known ids; undefined for unknown ids (check contains()).
  Category category(LabelId id) const noexcept { return lut_[id]; }

  // ROAD labels also answer to FLAT_GROUND queries.
  bool matches(LabelId id, CategorySet set) const noexcept;

  const std::map<LabelId, ClassEntry>& entries() const noexcept { return entries_; }
  std::optional<LabelId> find_by_name(std::string_view name) const;

  // Cityscapes label ids (0..33).
  static ClassTable cityscapes();

  // "id = name CATEGORY" lines.
  static ClassTable parse(std::string_view text);
  static ClassTable load(const std::string& path);
  std::string format() const;

 private:
  std::map<LabelId, ClassEntry> entries_;
  std::vector<Category> lut_;
};

// Validated per-pixel label ids.
class SegmentationMap {
 public:
  SegmentationMap() = default;
  // Throws kUnknownLabel listing every id absent from the table.
  SegmentationMap(Grid<LabelId> labels, const ClassTable& table);

  int width() const noexcept { return labels_.width(); }
  int height() const noexcept { return labels_.height(); }
  LabelId operator()(int x, int y) const noexcept { return labels_(x, y); }
  const Grid<LabelId>& labels() const noexcept { return labels_; }

  std::map<LabelId, std::size_t> histogram() const;

  friend bool operator==(const SegmentationMap&, const SegmentationMap&) = default;

 private:
  Grid<LabelId> labels_;
};

using InstanceId = std::uint16_t;

// Per-pixel instance ids, 0 = no instance. Paired with a SegmentationMap.
class InstanceMap {
 public:
  InstanceMap() = default;
  // Throws kDimensionMismatch / kFormat when an instance spans several labels.
  InstanceMap(Grid<InstanceId> ids, const SegmentationMap& seg);

  int width() const noexcept { return ids_.width(); }
  int height() const noexcept { return ids_.height(); }
  InstanceId operator()(int x, int y) const noexcept { return ids_(x, y); }
  const Grid<InstanceId>& ids() const noexcept { return ids_; }
  const std::map<InstanceId, LabelId>& labels() const noexcept { return label_of_; }

 private:
  Grid<InstanceId> ids_;
  std::map<InstanceId, LabelId> label_of_;
};

// Decodes an 8- or 16-bit single-channel PNG of label ids.
SegmentationMap load_labels(std::span<const std::uint8_t> png_bytes, const ClassTable& table);
SegmentationMap load_labels_file(const std::string& path, const ClassTable& table);
InstanceMap load_instances_file(const std::string& path, const SegmentationMap& seg);

Mask mask_for(const SegmentationMap& seg, const ClassTable& table, CategorySet categories);

struct Component {
  std::vector<Pixel> pixels;  // raster order
  int top = 0;
  int bottom = 0;
  int left = 0;
  int right = 0;
};

// 4-connected components of the true pixels, ordered by (top row, left column).
std::vector<Component> connected_components(const Mask& mask);

}  // namespace embodepth
