#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "otp/errors.hpp"
#include "otp/matrix.hpp"
#include "otp/metric.hpp"
#include "otp/relation.hpp"
#include "otp/space.hpp"
#include "otp/transport.hpp"

namespace otp {

// Line-oriented problem file. Sections open with a keyword and may consume
// the following non-keyword lines:
//
//   mode transport|pricing|lipschitz
//   space X <labels...> | space X interval <a> <b> <n> [interval ...]
//   space Y ...
//   cost product | cost absdiff | cost      (matrix rows follow)
//   mu uniform | mu <w1> <w2> ...           (may continue on further lines)
//   nu ...
//   frozen_pairs support | frozen_pairs     (lines: <xlabel> <ylabel>)
//   fixed_prices interval <a> <b> abs|value|const <v>
//   fixed_prices                            (lines: <label> <value>)
//   metric absdiff | metric graph           (lines: <ulabel> <vlabel> <w>)
//   metric                                  (matrix rows follow)
//
// '#' starts a comment; labels generated by interval grids are the point
// values printed with 12 significant digits. Expression forms (product,
// absdiff, abs, value) require numeric labels.
struct ProblemFile {
  enum class Mode { Transport, Pricing, Lipschitz };

  Mode mode = Mode::Transport;
  FiniteSpace space_x;
  FiniteSpace space_y;
  std::optional<Matrix> cost;
  std::optional<std::vector<double>> mu_weights;
  std::optional<std::vector<double>> nu_weights;
  bool frozen_from_support = false;
  std::optional<std::vector<IndexPair>> frozen_pairs;
  std::vector<std::pair<std::size_t, double>> fixed_prices;  // (x-index, value)
  std::optional<Matrix> metric_matrix;

  const char* mode_name() const {
    switch (mode) {
      case Mode::Transport: return "transport";
      case Mode::Pricing: return "pricing";
      case Mode::Lipschitz: return "lipschitz";
    }
    return "?";
  }
};

namespace detail {

struct RawLine {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

inline bool is_section_keyword(const std::string& t) {
  return t == "mode" || t == "space" || t == "cost" || t == "mu" || t == "nu" ||
         t == "frozen_pairs" || t == "fixed_prices" || t == "metric";
}

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg);
}

inline std::optional<double> parse_number(const std::string& tok) {
  if (tok.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

inline double require_number(const RawLine& line, std::size_t idx) {
  if (idx >= line.tokens.size()) parse_fail(line.number, "missing numeric field");
  auto v = parse_number(line.tokens[idx]);
  if (!v)
    parse_fail(line.number, "expected a number, got '" + line.tokens[idx] + "'");
  return *v;
}

inline std::string format_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Numeric value carried by a label, if any.
inline std::optional<double> label_value(const std::string& label) {
  return parse_number(label);
}

inline double require_label_value(const FiniteSpace& space, std::size_t i,
                                  const char* what) {
  auto v = label_value(space.label(i));
  if (!v)
    throw Error(ErrorKind::ValidationError,
                std::string(what) + " requires numeric labels; '" + space.label(i) +
                    "' is not a number");
  return *v;
}

inline std::size_t resolve_label(const FiniteSpace& space, const std::string& label,
                                 std::size_t line) {
  auto idx = space.find(label);
  if (!idx)
    throw Error(ErrorKind::ValidationError,
                "line " + std::to_string(line) + ": label '" + label +
                    "' does not name a point of the space");
  return *idx;
}

}  // namespace detail

inline ProblemFile parse_problem_text(const std::string& text) {
  using detail::RawLine;

  std::vector<RawLine> lines;
  {
    std::istringstream in(text);
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
      ++number;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      std::istringstream ls(raw);
      RawLine l{number, {}};
      std::string tok;
      while (ls >> tok) l.tokens.push_back(tok);
      if (!l.tokens.empty()) lines.push_back(std::move(l));
    }
  }
  if (lines.empty())
    throw Error(ErrorKind::ParseError, "problem file contains no content");

  // First pass: group lines into sections.
  struct Section {
    RawLine head;
    std::vector<RawLine> body;
  };
  std::vector<Section> sections;
  for (auto& l : lines) {
    if (detail::is_section_keyword(l.tokens[0])) {
      sections.push_back({std::move(l), {}});
    } else {
      if (sections.empty())
        detail::parse_fail(l.number, "content before any section keyword");
      sections.back().body.push_back(std::move(l));
    }
  }

  ProblemFile pf;
  bool has_x = false, has_y = false, has_mode = false;

  // Spaces and mode first; everything else resolves against them.
  for (const auto& sec : sections) {
    const auto& head = sec.head;
    const auto& t = head.tokens;
    if (t[0] == "mode") {
      if (t.size() != 2) detail::parse_fail(head.number, "mode needs one argument");
      if (t[1] == "transport")
        pf.mode = ProblemFile::Mode::Transport;
      else if (t[1] == "pricing")
        pf.mode = ProblemFile::Mode::Pricing;
      else if (t[1] == "lipschitz")
        pf.mode = ProblemFile::Mode::Lipschitz;
      else
        detail::parse_fail(head.number, "unknown mode '" + t[1] + "'");
      has_mode = true;
    } else if (t[0] == "space") {
      if (t.size() < 3) detail::parse_fail(head.number, "space needs a name and points");
      std::vector<std::string> labels;
      std::size_t k = 2;
      while (k < t.size()) {
        if (t[k] == "interval") {
          if (k + 3 >= t.size())
            detail::parse_fail(head.number, "interval needs: interval a b n");
          double a = detail::require_number(head, k + 1);
          double b = detail::require_number(head, k + 2);
          double n_d = detail::require_number(head, k + 3);
          std::size_t n = static_cast<std::size_t>(n_d);
          if (n_d != static_cast<double>(n) || n == 0)
            detail::parse_fail(head.number, "interval count must be a positive integer");
          if (n > 1 && !(a < b))
            detail::parse_fail(head.number, "interval needs a < b");
          for (std::size_t p = 0; p < n; ++p) {
            double v = n == 1 ? 0.5 * (a + b)
                              : a + static_cast<double>(p) * (b - a) /
                                        static_cast<double>(n - 1);
            labels.push_back(detail::format_label(v));
          }
          k += 4;
        } else {
          labels.push_back(t[k]);
          ++k;
        }
      }
      try {
        if (t[1] == "X") {
          pf.space_x = FiniteSpace(labels);
          has_x = true;
        } else if (t[1] == "Y") {
          pf.space_y = FiniteSpace(labels);
          has_y = true;
        } else {
          detail::parse_fail(head.number, "space name must be X or Y");
        }
      } catch (const Error& e) {
        detail::parse_fail(head.number, e.what());
      }
      if (!sec.body.empty())
        detail::parse_fail(sec.body.front().number, "unexpected content after space");
    }
  }

  if (!has_mode)
    throw Error(ErrorKind::ParseError, "missing 'mode' section");
  if (!has_x) throw Error(ErrorKind::ParseError, "missing 'space X' section");
  if (pf.mode == ProblemFile::Mode::Lipschitz && !has_y) pf.space_y = pf.space_x;
  else if (!has_y && pf.mode != ProblemFile::Mode::Lipschitz)
    throw Error(ErrorKind::ParseError, "missing 'space Y' section");

  const std::size_t nx = pf.space_x.size();
  const std::size_t ny = pf.space_y.size();

  auto collect_numbers = [](const Section& sec, std::size_t skip_head,
                            std::size_t expected) {
    std::vector<double> vals;
    vals.reserve(expected);
    auto take = [&](const RawLine& l, std::size_t from) {
      for (std::size_t k = from; k < l.tokens.size(); ++k) {
        auto v = detail::parse_number(l.tokens[k]);
        if (!v)
          detail::parse_fail(l.number, "expected a number, got '" + l.tokens[k] + "'");
        vals.push_back(*v);
      }
    };
    take(sec.head, skip_head);
    for (const auto& l : sec.body) take(l, 0);
    if (vals.size() != expected)
      detail::parse_fail(sec.head.number,
                         "expected " + std::to_string(expected) + " numbers, got " +
                             std::to_string(vals.size()));
    return vals;
  };

  // Second pass: the remaining sections.
  for (const auto& sec : sections) {
    const auto& head = sec.head;
    const auto& t = head.tokens;
    if (t[0] == "mode" || t[0] == "space") continue;

    if (t[0] == "cost") {
      if (t.size() == 2 && (t[1] == "product" || t[1] == "absdiff")) {
        Matrix c(nx, ny);
        for (std::size_t i = 0; i < nx; ++i) {
          double vx = detail::require_label_value(pf.space_x, i, "cost expression");
          for (std::size_t j = 0; j < ny; ++j) {
            double vy = detail::require_label_value(pf.space_y, j, "cost expression");
            c(i, j) = t[1] == "product" ? vx * vy : std::abs(vx - vy);
          }
        }
        pf.cost = std::move(c);
        if (!sec.body.empty())
          detail::parse_fail(sec.body.front().number,
                             "unexpected content after cost expression");
      } else if (t.size() == 1) {
        auto vals = collect_numbers(sec, 1, nx * ny);
        Matrix c(nx, ny);
        for (std::size_t i = 0; i < nx; ++i)
          for (std::size_t j = 0; j < ny; ++j) c(i, j) = vals[i * ny + j];
        pf.cost = std::move(c);
      } else {
        detail::parse_fail(head.number, "cost takes 'product', 'absdiff' or a matrix");
      }
    } else if (t[0] == "mu" || t[0] == "nu") {
      const bool is_mu = t[0] == "mu";
      const std::size_t count = is_mu ? nx : ny;
      std::vector<double> w;
      if (t.size() == 2 && t[1] == "uniform") {
        w.assign(count, 1.0 / static_cast<double>(count));
        if (!sec.body.empty())
          detail::parse_fail(sec.body.front().number,
                             "unexpected content after uniform weights");
      } else {
        w = collect_numbers(sec, 1, count);
      }
      if (is_mu)
        pf.mu_weights = std::move(w);
      else
        pf.nu_weights = std::move(w);
    } else if (t[0] == "frozen_pairs") {
      if (t.size() == 2 && t[1] == "support") {
        pf.frozen_from_support = true;
        if (!sec.body.empty())
          detail::parse_fail(sec.body.front().number,
                             "unexpected content after 'frozen_pairs support'");
      } else if (t.size() == 1) {
        std::vector<IndexPair> pairs;
        for (const auto& l : sec.body) {
          if (l.tokens.size() != 2)
            detail::parse_fail(l.number, "frozen pair line needs: <xlabel> <ylabel>");
          pairs.emplace_back(detail::resolve_label(pf.space_x, l.tokens[0], l.number),
                             detail::resolve_label(pf.space_y, l.tokens[1], l.number));
        }
        pf.frozen_pairs = std::move(pairs);
      } else {
        detail::parse_fail(head.number, "frozen_pairs takes 'support' or pair lines");
      }
    } else if (t[0] == "fixed_prices") {
      if (t.size() >= 4 && t[1] == "interval") {
        double a = detail::require_number(head, 2);
        double b = detail::require_number(head, 3);
        if (t.size() < 5)
          detail::parse_fail(head.number,
                             "fixed_prices interval needs an expression (abs, value, "
                             "const <v>)");
        const std::string& expr = t[4];
        double const_v = 0.0;
        if (expr == "const") {
          const_v = detail::require_number(head, 5);
        } else if (expr != "abs" && expr != "value") {
          detail::parse_fail(head.number, "unknown price expression '" + expr + "'");
        }
        bool any = false;
        for (std::size_t i = 0; i < nx; ++i) {
          auto v = detail::label_value(pf.space_x.label(i));
          if (!v || *v < a - 1e-12 || *v > b + 1e-12) continue;
          double price = expr == "abs" ? std::abs(*v) : (expr == "value" ? *v : const_v);
          pf.fixed_prices.emplace_back(i, price);
          any = true;
        }
        if (!any)
          throw Error(ErrorKind::ValidationError,
                      "fixed_prices interval selects no point of the space");
      } else if (t.size() == 1) {
        for (const auto& l : sec.body) {
          if (l.tokens.size() != 2)
            detail::parse_fail(l.number, "fixed price line needs: <label> <value>");
          std::size_t i = detail::resolve_label(pf.space_x, l.tokens[0], l.number);
          auto v = detail::parse_number(l.tokens[1]);
          if (!v) detail::parse_fail(l.number, "price must be a finite number");
          pf.fixed_prices.emplace_back(i, *v);
        }
      } else {
        detail::parse_fail(head.number,
                           "fixed_prices takes 'interval a b <expr>' or price lines");
      }
    } else if (t[0] == "metric") {
      if (t.size() == 2 && t[1] == "absdiff") {
        Matrix d(nx, nx);
        for (std::size_t i = 0; i < nx; ++i) {
          double vi = detail::require_label_value(pf.space_x, i, "metric absdiff");
          for (std::size_t j = 0; j < nx; ++j) {
            double vj = detail::require_label_value(pf.space_x, j, "metric absdiff");
            d(i, j) = std::abs(vi - vj);
          }
        }
        pf.metric_matrix = std::move(d);
      } else if (t.size() == 2 && t[1] == "graph") {
        std::vector<WeightedEdge> edges;
        for (const auto& l : sec.body) {
          if (l.tokens.size() != 3)
            detail::parse_fail(l.number, "edge line needs: <ulabel> <vlabel> <weight>");
          WeightedEdge e;
          e.u = detail::resolve_label(pf.space_x, l.tokens[0], l.number);
          e.v = detail::resolve_label(pf.space_x, l.tokens[1], l.number);
          auto w = detail::parse_number(l.tokens[2]);
          if (!w || !(*w > 0.0))
            detail::parse_fail(l.number, "edge weight must be a positive number");
          e.weight = *w;
          edges.push_back(e);
        }
        pf.metric_matrix = metric_from_graph(edges, pf.space_x).dist;
      } else if (t.size() == 1) {
        auto vals = collect_numbers(sec, 1, nx * nx);
        Matrix d(nx, nx);
        for (std::size_t i = 0; i < nx; ++i)
          for (std::size_t j = 0; j < nx; ++j) d(i, j) = vals[i * nx + j];
        pf.metric_matrix = std::move(d);
      } else {
        detail::parse_fail(head.number, "metric takes 'absdiff', 'graph' or a matrix");
      }
    }
  }

  return pf;
}

inline ProblemFile parse_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::ParseError, "cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str());
}

// Typed views over a parsed file, validating presence per command.

inline CouplingInstance problem_cost(const ProblemFile& pf) {
  if (!pf.cost)
    throw Error(ErrorKind::ValidationError, "problem file has no cost section");
  return CouplingInstance(pf.space_x, pf.space_y, *pf.cost);
}

inline DiscreteMeasure problem_mu(const ProblemFile& pf, const Tolerance& tol) {
  if (!pf.mu_weights)
    throw Error(ErrorKind::ValidationError, "problem file has no mu section");
  return DiscreteMeasure(pf.space_x, *pf.mu_weights, tol);
}

inline DiscreteMeasure problem_nu(const ProblemFile& pf, const Tolerance& tol) {
  if (!pf.nu_weights)
    throw Error(ErrorKind::ValidationError, "problem file has no nu section");
  return DiscreteMeasure(pf.space_y, *pf.nu_weights, tol);
}

inline FiniteMetric problem_metric(const ProblemFile& pf, const Tolerance& tol) {
  if (!pf.metric_matrix)
    throw Error(ErrorKind::ValidationError, "problem file has no metric section");
  return FiniteMetric(pf.space_x, *pf.metric_matrix, tol);
}

}  // namespace otp
