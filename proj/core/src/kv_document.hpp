#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace embodepth::detail {

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

// "key = value" lines; '#' starts a comment; blank lines ignored.
// Duplicate keys are rejected.
std::vector<KvEntry> parse_kv(std::string_view text, std::string_view document_name);

std::vector<double> parse_numbers(const KvEntry& entry, std::string_view document_name);
double parse_number(const KvEntry& entry, std::string_view document_name);
long long parse_integer(const KvEntry& entry, std::string_view document_name);

std::string read_text_file(const std::string& path);

std::string_view trim(std::string_view s);

}  // namespace embodepth::detail
