#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "embodepth/depth_map.hpp"
#include "embodepth/segmentation.hpp"

namespace embodepth {

struct ObjectDepth {
  InstanceId instance_id = 0;
  std::string class_name;
  double depth_m = 0.0;
  int rank = 0;  // 1 = nearest
  std::size_t pixel_count = 0;
};

enum class DepthAggregation { kMedian, kMean };

struct ObjectDepthOptions {
  std::size_t min_pixels = 50;
  DepthAggregation aggregation = DepthAggregation::kMedian;
};

// One entry per instance with at least min_pixels valid, non-sky scene pixels,
// ordered by rank. Ranks count from the nearest object; equal depths are
// ordered by instance id.
std::vector<ObjectDepth> object_depths(const DepthMap& scene, const InstanceMap& instances,
                                       const SegmentationMap& seg, const ClassTable& table,
                                       const ObjectDepthOptions& options = {});

// "1-st", "2-nd", "3-rd", "4-th", "11-th", "21-st", ...
std::string ordinal(int n);

// "This object seems to be 7.0 meters and ranks as the 1-st farthest in distance."
std::string render_description(const ObjectDepth& object);

struct CombinedText {
  std::vector<std::string> captions;
  std::vector<std::string> depth_sentences;
  std::vector<ObjectDepth> objects;  // parallel to depth_sentences

  // Captions then depth sentences, joined by single spaces.
  std::string serialize() const;
  nlohmann::json to_json() const;

  friend bool operator==(const CombinedText& a, const CombinedText& b) {
    return a.captions == b.captions && a.depth_sentences == b.depth_sentences;
  }
};

CombinedText combine_text(const std::vector<std::string>& captions,
                          std::vector<ObjectDepth> objects);

// Inverse of CombinedText::serialize for captions that each end in a
// terminal period and contain no internal ". " boundary. Depth sentences are
// recognised by their fixed template.
CombinedText parse_combined_text(std::string_view text);

// One caption per non-empty line, surrounding whitespace trimmed.
std::vector<std::string> parse_captions(std::string_view text);

}  // namespace embodepth
