#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace puflearn {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest round-trip decimal form of a double (via std::to_chars).
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

/// CSV with '#'-prefixed header comment lines followed by a plain column
/// header and rows. Everything below the comments is deterministic for a
/// fixed config and seed; timestamps and timings stay in the comments.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);

  void comment(const std::string& text);
  void columns(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
};

/// Standard header block: tool version, command, effective config and its
/// digest, and a timestamp (the one non-reproducible line).
void write_standard_header(CsvWriter& csv, const std::string& command,
                           const std::string& config_json, const std::string& digest);

std::string iso8601_now();

}  // namespace puflearn
