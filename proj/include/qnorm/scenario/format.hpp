#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qnorm::scenario {

// Shortest round-trip decimal; output is locale-independent.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format_number(std::int64_t v) { return std::to_string(v); }
inline std::string format_number(int v) { return std::to_string(v); }

class CsvBuilder {
 public:
  explicit CsvBuilder(std::string_view header) {
    text_ = header;
    text_ += '\n';
  }

  CsvBuilder& cell(double v) { return raw(format_number(v)); }
  CsvBuilder& cell(int v) { return raw(std::to_string(v)); }
  CsvBuilder& cell(std::string_view v) { return raw(v); }
  CsvBuilder& cell(const std::optional<double>& v) { return raw(v ? format_number(*v) : std::string()); }

  void end_row() {
    text_ += '\n';
    fresh_ = true;
  }

  std::string str() const { return text_; }

 private:
  CsvBuilder& raw(std::string_view s) {
    if (!fresh_) text_ += ',';
    text_ += s;
    fresh_ = false;
    return *this;
  }

  std::string text_;
  bool fresh_ = true;
};

}  // namespace qnorm::scenario
