#include "embodepth/language.hpp"

#include <algorithm>
#include <map>
#include <regex>

#include <fmt/format.h>

#include "kv_document.hpp"

namespace embodepth {
namespace {

constexpr std::string_view kTemplatePrefix = "This object seems to be ";

double median_of(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<ObjectDepth> object_depths(const DepthMap& scene, const InstanceMap& instances,
                                       const SegmentationMap& seg, const ClassTable& table,
                                       const ObjectDepthOptions& options) {
  require_same_shape(scene, instances, "object depths");
  require_same_shape(scene, seg, "object depths");
  if (options.min_pixels < 1) throw Error(ErrorCode::kDomain, "min_pixels must be >= 1");

  std::map<InstanceId, std::vector<double>> samples;
  for (int y = 0; y < scene.height(); ++y) {
    for (int x = 0; x < scene.width(); ++x) {
      const InstanceId id = instances(x, y);
      if (id != 0 && scene.valid(x, y)) samples[id].push_back(scene.at(x, y));
    }
  }

  std::vector<ObjectDepth> objects;
  for (auto& [id, values] : samples) {
    if (values.size() < options.min_pixels) continue;
    ObjectDepth o;
    o.instance_id = id;
    o.class_name = table.at(instances.labels().at(id)).name;
    o.pixel_count = values.size();
    o.depth_m = options.aggregation == DepthAggregation::kMedian ? median_of(values) : mean_of(values);
    objects.push_back(std::move(o));
  }
  std::sort(objects.begin(), objects.end(), [](const ObjectDepth& a, const ObjectDepth& b) {
    return a.depth_m != b.depth_m ? a.depth_m < b.depth_m : a.instance_id < b.instance_id;
  });
  for (std::size_t i = 0; i < objects.size(); ++i) objects[i].rank = static_cast<int>(i + 1);
  return objects;
}

std::string ordinal(int n) {
  const int mod100 = n % 100;
  const int mod10 = n % 10;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    if (mod10 == 1) suffix = "st";
    if (mod10 == 2) suffix = "nd";
    if (mod10 == 3) suffix = "rd";
  }
  return fmt::format("{}-{}", n, suffix);
}

std::string render_description(const ObjectDepth& object) {
  return fmt::format("{}{:.1f} meters and ranks as the {} farthest in distance.", kTemplatePrefix,
                     object.depth_m, ordinal(object.rank));
}

std::string CombinedText::serialize() const {
  std::string out;
  auto append = [&out](const std::string& s) {
    if (!out.empty()) out += ' ';
    out += s;
  };
  for (const auto& c : captions) append(c);
  for (const auto& d : depth_sentences) append(d);
  return out;
}

nlohmann::json CombinedText::to_json() const {
  nlohmann::json objs = nlohmann::json::array();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    objs.push_back({{"id", o.instance_id},
                    {"class", o.class_name},
                    {"d", o.depth_m},
                    {"r", o.rank},
                    {"pixels", o.pixel_count},
                    {"sentence", depth_sentences.at(i)}});
  }
  return {{"captions", captions}, {"objects", std::move(objs)}, {"text", serialize()}};
}

CombinedText combine_text(const std::vector<std::string>& captions,
                          std::vector<ObjectDepth> objects) {
  std::stable_sort(objects.begin(), objects.end(),
                   [](const ObjectDepth& a, const ObjectDepth& b) { return a.rank < b.rank; });
  CombinedText t;
  for (const auto& c : captions) {
    const auto trimmed = detail::trim(c);
    if (!trimmed.empty()) t.captions.emplace_back(trimmed);
  }
  for (const auto& o : objects) t.depth_sentences.push_back(render_description(o));
  t.objects = std::move(objects);
  return t;
}

CombinedText parse_combined_text(std::string_view text) {
  static const std::regex depth_sentence(
      R"(This object seems to be (\d+\.\d) meters and ranks as the (\d+)-(st|nd|rd|th) farthest in distance\.)");
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '.' && (i + 1 == text.size() || text[i + 1] == ' ')) {
      sentences.emplace_back(text.substr(start, i + 1 - start));
      start = i + 2;
      ++i;
    }
  }
  if (start < text.size()) sentences.emplace_back(text.substr(start));

  CombinedText t;
  for (auto& s : sentences) {
    std::smatch m;
    if (std::regex_match(s, m, depth_sentence)) {
      ObjectDepth o;
      o.depth_m = std::stod(m[1].str());
      o.rank = std::stoi(m[2].str());
      t.objects.push_back(o);
      t.depth_sentences.push_back(std::move(s));
    } else {
      if (!t.depth_sentences.empty()) {
        throw Error(ErrorCode::kFormat, "combined text: caption found after depth sentences");
      }
      t.captions.push_back(std::move(s));
    }
  }
  return t;
}

std::vector<std::string> parse_captions(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = detail::trim(text.substr(pos, end - pos));
    if (!line.empty()) out.emplace_back(line);
    pos = end + 1;
  }
  return out;
}

}  // namespace embodepth
