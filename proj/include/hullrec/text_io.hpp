#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace hullrec::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Strict parse: the whole token must be consumed.
bool parse_double(std::string_view s, double& out);
bool parse_u64(std::string_view s, std::uint64_t& out);
bool parse_i64(std::string_view s, std::int64_t& out);

std::vector<std::string_view> split(std::string_view line, char sep);
/// Splits on runs of spaces/tabs, dropping empty fields.
std::vector<std::string_view> split_ws(std::string_view line);
std::string_view trim(std::string_view s);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

/// FNV-1a, 64 bit.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  void update(std::uint64_t v);
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t v);

}  // namespace hullrec::text
