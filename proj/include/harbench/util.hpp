#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace harbench {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] void fail(const std::string& message);

/// SHA-256 of `data`, lowercase hex (64 chars).
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Fixed-point decimal rendering, '.' separator, no locale.
std::string format_fixed(double value, int decimals);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// True when s[pos..pos+len) is not flanked by alphanumerics.
bool word_bounded(std::string_view s, size_t pos, size_t len);

/// Case-insensitive word-bounded occurrence count.
size_t count_occurrences(std::string_view haystack, std::string_view needle);

std::string iso8601_utc_now();

}  // namespace harbench
