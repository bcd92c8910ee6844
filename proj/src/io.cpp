#include "rpca/io.hpp"

#include "rpca/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace rpca {

std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

namespace {

class Lexer {
 public:
  Lexer(std::string_view text, std::string origin) : t_(text), origin_(std::move(origin)) {}

  // Skips '#' lines only while nothing else has been read.
  void skip_comments() {
    while (true) {
      skip_space();
      if (p_ < t_.size() && t_[p_] == '#') {
        while (p_ < t_.size() && t_[p_] != '\n') ++p_;
      } else {
        return;
      }
    }
  }
  bool at_end() {
    skip_space();
    return p_ >= t_.size();
  }
  long long integer(const char* what) {
    skip_space();
    long long v = 0;
    const auto r = std::from_chars(t_.data() + p_, t_.data() + t_.size(), v);
    if (r.ec != std::errc()) fail(std::string("expected integer ") + what);
    p_ = static_cast<std::size_t>(r.ptr - t_.data());
    return v;
  }
  double real() {
    skip_space();
    double v = 0.0;
    const auto r = std::from_chars(t_.data() + p_, t_.data() + t_.size(), v);
    if (r.ec != std::errc()) fail("expected real number");
    p_ = static_cast<std::size_t>(r.ptr - t_.data());
    if (!std::isfinite(v)) fail("non-finite entry");
    return v;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < p_ && i < t_.size(); ++i) line += t_[i] == '\n';
    throw IoError(msg + " at line " + std::to_string(line), origin_);
  }

 private:
  void skip_space() {
    while (p_ < t_.size() && (t_[p_] == ' ' || t_[p_] == '\t' || t_[p_] == '\n' || t_[p_] == '\r'))
      ++p_;
  }
  std::string_view t_;
  std::string origin_;
  std::size_t p_ = 0;
};

}  // namespace

std::string render_matrix(const Matrix& m, std::string_view comment) {
  std::string out;
  if (!comment.empty()) {
    std::istringstream lines{std::string(comment)};
    for (std::string l; std::getline(lines, l);) out += "# " + l + "\n";
  }
  out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      out += format_real(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix(std::string_view text, const std::string& origin) {
  Lexer lx(text, origin);
  lx.skip_comments();
  const long long rows = lx.integer("row count");
  const long long cols = lx.integer("column count");
  if (rows < 0 || cols < 0) lx.fail("negative dimension");
  Matrix m(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    for (long long j = 0; j < cols; ++j) m(i, j) = lx.real();
  }
  if (!lx.at_end()) lx.fail("trailing data after " + std::to_string(rows * cols) + " entries");
  return m;
}

Matrix read_matrix(const std::string& path) { return parse_matrix(read_file(path), path); }

void write_matrix(const std::string& path, const Matrix& m, std::string_view comment) {
  write_file_atomic(path, render_matrix(m, comment));
}

std::string render_support(const SupportMask& s) {
  std::string out;
  for (const auto& [i, j] : s.observed) out += std::to_string(i) + " " + std::to_string(j) + "\n";
  return out;
}

SupportMask parse_support(std::string_view text, Eigen::Index rows, Eigen::Index cols,
                          const std::string& origin) {
  Lexer lx(text, origin);
  lx.skip_comments();
  SupportMask s{rows, cols, {}};
  while (!lx.at_end()) {
    const long long i = lx.integer("row index");
    const long long j = lx.integer("column index");
    s.observed.emplace_back(i, j);
  }
  try {
    s.normalize();
  } catch (const Error& e) {
    throw IoError(e.what(), origin);
  }
  return s;
}

SupportMask read_support(const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  return parse_support(read_file(path), rows, cols, path);
}

void write_support(const std::string& path, const SupportMask& s) {
  write_file_atomic(path, render_support(s));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed", path);
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing", path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed", path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("rename failed", path);
  }
}

}  // namespace rpca
