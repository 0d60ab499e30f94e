#include "embodepth/segmentation.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "embodepth/image_io.hpp"
#include "kv_document.hpp"

namespace embodepth {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kRoad: return "ROAD";
    case Category::kFlatGround: return "FLAT_GROUND";
    case Category::kVertical: return "VERTICAL";
    case Category::kSky: return "SKY";
    case Category::kVoid: return "VOID";
  }
  return "VOID";
}

Category parse_category(std::string_view text) {
  for (auto c : {Category::kRoad, Category::kFlatGround, Category::kVertical, Category::kSky,
                 Category::kVoid}) {
    if (text == to_string(c)) return c;
  }
  throw Error(ErrorCode::kConfig, fmt::format("unknown category '{}'", text));
}

ClassTable::ClassTable() : lut_(65536, Category::kVoid) {}

void ClassTable::add(LabelId id, std::string name, Category category) {
  if (entries_.contains(id)) {
    throw Error(ErrorCode::kConfig, fmt::format("class table: duplicate label id {}", id));
  }
  if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
    throw Error(ErrorCode::kConfig,
                fmt::format("class table: label {} needs a non-empty name without spaces", id));
  }
  entries_.emplace(id, ClassEntry{id, std::move(name), category});
  lut_[id] = category;
}

const ClassEntry* ClassTable::find(LabelId id) const noexcept {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

const ClassEntry& ClassTable::at(LabelId id) const {
  if (const auto* e = find(id)) return *e;
  throw Error(ErrorCode::kUnknownLabel, fmt::format("label id {} is not in the class table", id));
}

bool ClassTable::matches(LabelId id, CategorySet set) const noexcept {
  const Category c = lut_[id];
  return set.contains(c) || (c == Category::kRoad && set.contains(Category::kFlatGround));
}

std::optional<LabelId> ClassTable::find_by_name(std::string_view name) const {
  for (const auto& [id, e] : entries_) {
    if (e.name == name) return id;
  }
  return std::nullopt;
}

ClassTable ClassTable::cityscapes() {
  using C = Category;
  ClassTable t;
  const std::pair<const char*, C> rows[] = {
      {"unlabeled", C::kVoid},       {"ego_vehicle", C::kVoid},    {"rectification_border", C::kVoid},
      {"out_of_roi", C::kVoid},      {"static", C::kVoid},         {"dynamic", C::kVoid},
      {"ground", C::kVoid},          {"road", C::kRoad},           {"sidewalk", C::kFlatGround},
      {"parking", C::kFlatGround},   {"rail_track", C::kVoid},     {"building", C::kVertical},
      {"wall", C::kVertical},        {"fence", C::kVertical},      {"guard_rail", C::kVertical},
      {"bridge", C::kVertical},      {"tunnel", C::kVertical},     {"pole", C::kVertical},
      {"polegroup", C::kVertical},   {"traffic_light", C::kVertical},
      {"traffic_sign", C::kVertical}, {"vegetation", C::kVertical}, {"terrain", C::kFlatGround},
      {"sky", C::kSky},              {"person", C::kVertical},     {"rider", C::kVertical},
      {"car", C::kVertical},         {"truck", C::kVertical},      {"bus", C::kVertical},
      {"caravan", C::kVertical},     {"trailer", C::kVertical},    {"train", C::kVertical},
      {"motorcycle", C::kVertical},  {"bicycle", C::kVertical},
  };
  LabelId id = 0;
  for (const auto& [name, cat] : rows) t.add(id++, name, cat);
  return t;
}

ClassTable ClassTable::parse(std::string_view text) {
  constexpr std::string_view doc = "class table";
  ClassTable t;
  for (const auto& e : detail::parse_kv(text, doc)) {
    const long long id = detail::parse_integer(
        detail::KvEntry{e.key, e.key, e.line}, doc);
    if (id < 0 || id > 65535) {
      throw Error(ErrorCode::kConfig, fmt::format("{}:{}: label id {} out of range", doc, e.line, id));
    }
    std::istringstream in(e.value);
    std::string name, category, extra;
    if (!(in >> name >> category) || (in >> extra)) {
      throw Error(ErrorCode::kConfig,
                  fmt::format("{}:{}: expected 'id = name CATEGORY'", doc, e.line));
    }
    t.add(static_cast<LabelId>(id), name, parse_category(category));
  }
  if (t.entries_.empty()) throw Error(ErrorCode::kConfig, "class table is empty");
  return t;
}

ClassTable ClassTable::load(const std::string& path) {
  return parse(detail::read_text_file(path));
}

std::string ClassTable::format() const {
  std::string out;
  for (const auto& [id, e] : entries_) {
    out += fmt::format("{} = {} {}\n", id, e.name, to_string(e.category));
  }
  return out;
}

SegmentationMap::SegmentationMap(Grid<LabelId> labels, const ClassTable& table)
    : labels_(std::move(labels)) {
  if (labels_.width() == 0 || labels_.height() == 0) {
    throw Error(ErrorCode::kFormat, "label map has a zero dimension");
  }
  std::set<LabelId> unknown;
  for (auto id : labels_.data()) {
    if (!table.contains(id)) unknown.insert(id);
  }
  if (!unknown.empty()) {
    throw Error(ErrorCode::kUnknownLabel,
                fmt::format("label map contains ids missing from the class table: {}",
                            fmt::join(unknown, ", ")));
  }
}

std::map<LabelId, std::size_t> SegmentationMap::histogram() const {
  std::map<LabelId, std::size_t> h;
  for (auto id : labels_.data()) ++h[id];
  return h;
}

InstanceMap::InstanceMap(Grid<InstanceId> ids, const SegmentationMap& seg) : ids_(std::move(ids)) {
  require_same_shape(ids_, seg, "instance map");
  std::map<InstanceId, std::set<LabelId>> seen;
  for (int y = 0; y < ids_.height(); ++y) {
    for (int x = 0; x < ids_.width(); ++x) {
      if (const auto id = ids_(x, y); id != 0) seen[id].insert(seg(x, y));
    }
  }
  for (const auto& [id, labels] : seen) {
    if (labels.size() != 1) {
      throw Error(ErrorCode::kFormat,
                  fmt::format("instance {} spans several class labels: {}", id, fmt::join(labels, ", ")));
    }
    label_of_[id] = *labels.begin();
  }
}

SegmentationMap load_labels(std::span<const std::uint8_t> png_bytes, const ClassTable& table) {
  GrayImage image = decode_png_gray(png_bytes);
  return SegmentationMap(std::move(image.samples), table);
}

SegmentationMap load_labels_file(const std::string& path, const ClassTable& table) {
  try {
    return load_labels(read_binary_file(path), table);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

InstanceMap load_instances_file(const std::string& path, const SegmentationMap& seg) {
  try {
    GrayImage image = read_png_gray(path);
    return InstanceMap(std::move(image.samples), seg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

Mask mask_for(const SegmentationMap& seg, const ClassTable& table, CategorySet categories) {
  Mask mask(seg.width(), seg.height());
  auto out = mask.data();
  auto in = seg.labels().data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = table.matches(in[i], categories) ? 1 : 0;
  return mask;
}

std::vector<Component> connected_components(const Mask& mask) {
  std::vector<Component> components;
  Grid<std::uint8_t> visited(mask.width(), mask.height(), 0);
  std::vector<Pixel> stack;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.test(x, y) || visited(x, y)) continue;
      Component c;
      c.top = c.bottom = y;
      c.left = c.right = x;
      visited(x, y) = 1;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        c.pixels.push_back(p);
        c.top = std::min(c.top, p.y);
        c.bottom = std::max(c.bottom, p.y);
        c.left = std::min(c.left, p.x);
        c.right = std::max(c.right, p.x);
        const Pixel next[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
        for (const Pixel& q : next) {
          if (mask.contains(q.x, q.y) && mask.test(q.x, q.y) && !visited(q.x, q.y)) {
            visited(q.x, q.y) = 1;
            stack.push_back(q);
          }
        }
      }
      std::sort(c.pixels.begin(), c.pixels.end(),
                [](const Pixel& a, const Pixel& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      components.push_back(std::move(c));
    }
  }
  // Raster discovery already orders by top row; stable sort settles the left
  // column among components sharing a top row.
  std::stable_sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
    return a.top != b.top ? a.top < b.top : a.left < b.left;
  });
  return components;
}

}  // namespace embodepth
