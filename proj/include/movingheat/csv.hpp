#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>

#include "movingheat/errors.hpp"

namespace movingheat::csv {

/// Shortest representation that parses back to the same double (<= 17 significant digits).
inline std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Line-buffered writer; every field separated by a comma.
class Writer {
public:
  explicit Writer(const std::string &path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ValidationError("cannot open '" + path + "' for writing");
  }

  Writer &header(std::string_view line) {
    out_ << line << '\n';
    return *this;
  }

  Writer &field(double v) { return raw(format(v)); }
  Writer &field(std::size_t v) { return raw(std::to_string(v)); }
  Writer &field(unsigned long long v) { return raw(std::to_string(v)); }
  Writer &field(std::string_view s) { return raw(s); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

  void close() {
    out_.close();
    if (!out_) throw ValidationError("failed writing '" + path_ + "'");
  }

private:
  Writer &raw(std::string_view s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }

  std::string path_;
  std::ofstream out_;
  bool first_ = true;
};

} // namespace movingheat::csv
