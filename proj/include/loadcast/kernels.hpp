// Periodic calendar kernels and a small expression language over them.
//
// Atoms:
//   kt — periodic Gaussian in time of day (period 24 h)
//   kd — periodic Gaussian in day of year (period 366 d)
//   kc — 0/1 indicator of equal day type
// Expressions combine atoms with '+' and '*'; '*' binds tighter. Sums and
// products of positive semidefinite kernels stay positive semidefinite.
#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "loadcast/calendar.hpp"
#include "loadcast/common.hpp"

namespace loadcast {

inline constexpr double kTimePeriod = 24.0;
inline constexpr double kDayPeriod = 366.0;
inline constexpr double kDefaultTimeSigma = 4.0;    // hours
inline constexpr double kDefaultDaySigma = 120.0;   // days

// Shortest way around a circle of circumference `period`, for x in [0, period].
inline double periodic_distance(double x, double period) {
  if (!(period > 0.0)) {
    throw std::invalid_argument("periodic_distance: period must be positive");
  }
  if (!(x >= 0.0 && x <= period)) {
    throw std::invalid_argument("periodic_distance: value " + detail::format_double(x) +
                                " outside [0, " + detail::format_double(period) + "]");
  }
  return std::min(x, period - x);
}

struct KernelExpr;
using KernelPtr = std::shared_ptr<const KernelExpr>;

// Immutable expression tree. Sum/Product nodes are flattened n-ary.
struct KernelExpr {
  enum class Kind { time_of_day, day_of_year, day_type, sum, product };

  Kind kind;
  double sigma = 0.0;              // bandwidth, for kt/kd atoms
  std::vector<KernelPtr> children; // for sum/product

  static KernelPtr time_atom(double sigma = kDefaultTimeSigma) {
    require_sigma(sigma);
    return std::make_shared<KernelExpr>(KernelExpr{Kind::time_of_day, sigma, {}});
  }
  static KernelPtr day_atom(double sigma = kDefaultDaySigma) {
    require_sigma(sigma);
    return std::make_shared<KernelExpr>(KernelExpr{Kind::day_of_year, sigma, {}});
  }
  static KernelPtr class_atom() {
    return std::make_shared<KernelExpr>(KernelExpr{Kind::day_type, 0.0, {}});
  }
  // Nested same-kind nodes are spliced in place, so trees are canonical by
  // construction and survive a print/parse round trip unchanged. Splicing is
  // exact: left-to-right accumulation gives bit-identical evaluation.
  static KernelPtr sum(std::vector<KernelPtr> terms) {
    if (terms.empty()) throw std::invalid_argument("kernel sum needs at least one term");
    auto flat = flatten(Kind::sum, std::move(terms));
    if (flat.size() == 1) return flat.front();
    return std::make_shared<KernelExpr>(KernelExpr{Kind::sum, 0.0, std::move(flat)});
  }
  static KernelPtr product(std::vector<KernelPtr> factors) {
    if (factors.empty()) throw std::invalid_argument("kernel product needs at least one factor");
    auto flat = flatten(Kind::product, std::move(factors));
    if (flat.size() == 1) return flat.front();
    return std::make_shared<KernelExpr>(KernelExpr{Kind::product, 0.0, std::move(flat)});
  }

 private:
  static void require_sigma(double sigma) {
    if (!(sigma > 0.0)) {
      throw std::invalid_argument("kernel bandwidth must be positive, got " +
                                  detail::format_double(sigma));
    }
  }

  static std::vector<KernelPtr> flatten(Kind kind, std::vector<KernelPtr> nodes) {
    std::vector<KernelPtr> flat;
    flat.reserve(nodes.size());
    for (auto& node : nodes) {
      if (node->kind == kind) {
        flat.insert(flat.end(), node->children.begin(), node->children.end());
      } else {
        flat.push_back(std::move(node));
      }
    }
    return flat;
  }
};

inline double eval_kernel(const KernelExpr& k, const CalendarPoint& a, const CalendarPoint& b) {
  switch (k.kind) {
    case KernelExpr::Kind::time_of_day:
      return std::exp(-periodic_distance(std::abs(a.time_of_day - b.time_of_day), kTimePeriod) /
                      k.sigma);
    case KernelExpr::Kind::day_of_year:
      return std::exp(-periodic_distance(std::abs(a.day_of_year - b.day_of_year), kDayPeriod) /
                      k.sigma);
    case KernelExpr::Kind::day_type:
      return a.day_type == b.day_type ? 1.0 : 0.0;
    case KernelExpr::Kind::sum: {
      double v = 0.0;
      for (const auto& c : k.children) v += eval_kernel(*c, a, b);
      return v;
    }
    case KernelExpr::Kind::product: {
      double v = 1.0;
      for (const auto& c : k.children) v *= eval_kernel(*c, a, b);
      return v;
    }
  }
  throw std::logic_error("eval_kernel: unreachable");
}

inline double eval_kernel(const KernelPtr& k, const CalendarPoint& a, const CalendarPoint& b) {
  return eval_kernel(*k, a, b);
}

// --- expression parser --------------------------------------------------
//
//   expr   := term ('+' term)*
//   term   := factor ('*' factor)*
//   factor := atom | '(' expr ')'
//   atom   := ('kt' | 'kd') ['(' 'sigma' '=' number ')'] | 'kc'

namespace detail {

class KernelParser {
 public:
  explicit KernelParser(std::string_view text) : text_(text) {}

  KernelPtr parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != text_.size()) {
      fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    }
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("kernel expression: " + what + " at position " +
                                std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  KernelPtr expr() {
    std::vector<KernelPtr> terms;
    terms.push_back(term());
    while (consume('+')) terms.push_back(term());
    return KernelExpr::sum(std::move(terms));
  }

  KernelPtr term() {
    std::vector<KernelPtr> factors;
    factors.push_back(factor());
    while (consume('*')) factors.push_back(factor());
    return KernelExpr::product(std::move(factors));
  }

  KernelPtr factor() {
    skip_ws();
    if (consume('(')) {
      auto e = expr();
      expect(')');
      return e;
    }
    return atom();
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected kernel name");
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_ws();
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  KernelPtr atom() {
    std::size_t name_pos = pos_;
    std::string name = ident();
    if (name == "kc") return KernelExpr::class_atom();
    if (name != "kt" && name != "kd") {
      pos_ = name_pos;
      fail("unknown kernel '" + name + "'");
    }
    double sigma = name == "kt" ? kDefaultTimeSigma : kDefaultDaySigma;
    if (consume('(')) {
      std::string key = ident();
      if (key != "sigma") fail("expected 'sigma'");
      expect('=');
      std::size_t value_pos = pos_;
      sigma = number();
      if (!(sigma > 0.0)) {
        pos_ = value_pos;
        fail("bandwidth must be positive");
      }
      expect(')');
    }
    return name == "kt" ? KernelExpr::time_atom(sigma) : KernelExpr::day_atom(sigma);
  }
};

}  // namespace detail

inline KernelPtr parse_kernel_expr(std::string_view text) {
  return detail::KernelParser(text).parse();
}

// Canonical text form; parse(to_string(k)) reproduces k exactly.
inline std::string to_string(const KernelExpr& k) {
  switch (k.kind) {
    case KernelExpr::Kind::time_of_day:
      return "kt(sigma=" + detail::format_double(k.sigma) + ")";
    case KernelExpr::Kind::day_of_year:
      return "kd(sigma=" + detail::format_double(k.sigma) + ")";
    case KernelExpr::Kind::day_type:
      return "kc";
    case KernelExpr::Kind::sum: {
      std::string out;
      for (std::size_t i = 0; i < k.children.size(); ++i) {
        if (i) out += " + ";
        out += to_string(*k.children[i]);
      }
      return out;
    }
    case KernelExpr::Kind::product: {
      std::string out;
      for (std::size_t i = 0; i < k.children.size(); ++i) {
        if (i) out += " * ";
        const KernelExpr& c = *k.children[i];
        if (c.kind == KernelExpr::Kind::sum) {
          out += "(" + to_string(c) + ")";
        } else {
          out += to_string(c);
        }
      }
      return out;
    }
  }
  throw std::logic_error("to_string: unreachable");
}

inline std::string to_string(const KernelPtr& k) { return to_string(*k); }

// Named kernel structures used throughout: additive (am), semi-additive
// (sam), and multiplicative (mm) combinations of the three atoms.
inline KernelPtr preset_kernel(std::string_view name) {
  if (name == "am1") return parse_kernel_expr("kt + kd");
  if (name == "am2") return parse_kernel_expr("kt + kd + kc");
  if (name == "sam1") return parse_kernel_expr("kd + kt * kc");
  if (name == "sam2") return parse_kernel_expr("(kt + kd) * kc");
  if (name == "mm1") return parse_kernel_expr("kt * kd");
  if (name == "mm2") return parse_kernel_expr("kt * kd * kc");
  throw std::invalid_argument("unknown kernel preset '" + std::string(name) +
                              "' (expected am1, am2, sam1, sam2, mm1 or mm2)");
}

// Rectangular Gram matrix G(i, j) = k(rows[i], cols[j]).
inline Eigen::MatrixXd gram(const KernelExpr& k, const std::vector<CalendarPoint>& rows,
                            const std::vector<CalendarPoint>& cols) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = eval_kernel(k, rows[i], cols[j]);
    }
  }
  return g;
}

// Symmetric Gram matrix; computes the upper triangle and mirrors it so the
// result is exactly symmetric in floating point.
inline Eigen::MatrixXd gram(const KernelExpr& k, const std::vector<CalendarPoint>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      double v = eval_kernel(k, points[static_cast<std::size_t>(i)],
                             points[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

inline Eigen::MatrixXd gram(const KernelPtr& k, const std::vector<CalendarPoint>& rows,
                            const std::vector<CalendarPoint>& cols) {
  return gram(*k, rows, cols);
}

inline Eigen::MatrixXd gram(const KernelPtr& k, const std::vector<CalendarPoint>& points) {
  return gram(*k, points);
}

}  // namespace loadcast
