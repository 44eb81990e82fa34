#include "puflearn/io.hpp"

#include <charconv>
#include <chrono>
#include <ctime>

#include "puflearn/errors.hpp"

namespace puflearn {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
  if (!out_) throw InvalidArgument("CsvWriter: cannot open " + path);
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void CsvWriter::columns(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ",";
    out_ << cells[i];
  }
  out_ << "\n";
}

void write_standard_header(CsvWriter& csv, const std::string& command,
                           const std::string& config_json, const std::string& digest) {
  csv.comment(std::string("puflearn v") + kToolVersion);
  csv.comment("command: " + command);
  csv.comment("config: " + config_json);
  csv.comment("config-digest: " + digest);
  csv.comment("generated: " + iso8601_now());
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace puflearn
