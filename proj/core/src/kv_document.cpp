#include "kv_document.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "embodepth/error.hpp"

namespace embodepth::detail {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<KvEntry> parse_kv(std::string_view text, std::string_view document_name) {
  std::vector<KvEntry> entries;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig,
                  fmt::format("{}:{}: expected 'key = value'", document_name, line_no));
    }
    KvEntry entry{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))),
                  line_no};
    if (entry.key.empty()) {
      throw Error(ErrorCode::kConfig, fmt::format("{}:{}: empty key", document_name, line_no));
    }
    if (!seen.insert(entry.key).second) {
      throw Error(ErrorCode::kConfig,
                  fmt::format("{}:{}: duplicate key '{}'", document_name, line_no, entry.key));
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<double> parse_numbers(const KvEntry& entry, std::string_view document_name) {
  std::vector<double> out;
  std::istringstream in(entry.value);
  std::string token;
  while (in >> token) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw Error(ErrorCode::kConfig, fmt::format("{}:{}: '{}' is not a number for key '{}'",
                                                  document_name, entry.line, token, entry.key));
    }
    out.push_back(value);
  }
  return out;
}

double parse_number(const KvEntry& entry, std::string_view document_name) {
  const auto values = parse_numbers(entry, document_name);
  if (values.size() != 1) {
    throw Error(ErrorCode::kConfig, fmt::format("{}:{}: key '{}' expects one number",
                                                document_name, entry.line, entry.key));
  }
  return values.front();
}

long long parse_integer(const KvEntry& entry, std::string_view document_name) {
  long long value = 0;
  const std::string& s = entry.value;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kConfig, fmt::format("{}:{}: key '{}' expects an integer",
                                                document_name, entry.line, entry.key));
  }
  return value;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace embodepth::detail
