#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otp/errors.hpp"
#include "otp/potential.hpp"

namespace otp {

// 12 significant digits, locale-independent; round-trips every value the
// library reports.
inline std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // never print -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Plain-text report accumulator. Output is deterministic: fixed section
// order, fixed formatting, no timestamps.
class Report {
 public:
  void section(const std::string& title) {
    out_ << "== " << title << " ==\n";
  }

  void kv(const std::string& key, const std::string& value) {
    out_ << key << ": " << value << "\n";
  }

  void kv(const std::string& key, double value) { kv(key, format_value(value)); }

  void kv(const std::string& key, std::size_t value) {
    out_ << key << ": " << value << "\n";
  }

  void line(const std::string& text) { out_ << text << "\n"; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << "  ";
      out_ << cells[k];
    }
    out_ << "\n";
  }

  void blank() { out_ << "\n"; }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

// CSV with columns label,alpha,gamma,fixed ('.' decimal separator, 12
// significant digits); 'fixed' marks points of the frozen price set.
inline void write_corridor_csv(const std::string& path,
                               const std::vector<std::string>& labels,
                               const ExtendedPotential& alpha,
                               const ExtendedPotential& gamma,
                               const std::vector<char>& fixed) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorKind::ValidationError, "cannot open CSV output '" + path + "'");
  out << "label,alpha,gamma,fixed\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << labels[i] << ',' << format_value(alpha[i]) << ',' << format_value(gamma[i])
        << ',' << (fixed[i] ? 1 : 0) << '\n';
}

}  // namespace otp
