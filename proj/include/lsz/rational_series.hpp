#pragma once

// Truncated power series in the coupling with exact big-rational
// coefficients. Used by the curve series solver and as the number type of
// the ribbon-graph oracle; never touches floating point.

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lsz/errors.hpp"

namespace lsz {

using rat = boost::multiprecision::cpp_rational;

class RationalSeries {
 public:
  RationalSeries() : c_(1, rat(0)), order_(0) {}
  explicit RationalSeries(int order, rat constant = rat(0)) : c_(order + 1, rat(0)), order_(order) {
    c_[0] = std::move(constant);
  }
  RationalSeries(int order, std::vector<rat> coeffs) : c_(std::move(coeffs)), order_(order) {
    c_.resize(order + 1, rat(0));
  }

  int order() const { return order_; }
  const rat& operator[](int k) const { return c_[k]; }
  rat& operator[](int k) { return c_[k]; }
  const std::vector<rat>& coeffs() const { return c_; }

  RationalSeries& operator+=(const RationalSeries& o) {
    check(o);
    for (int k = 0; k <= order_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  RationalSeries& operator-=(const RationalSeries& o) {
    check(o);
    for (int k = 0; k <= order_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  friend RationalSeries operator+(RationalSeries a, const RationalSeries& b) { return a += b; }
  friend RationalSeries operator-(RationalSeries a, const RationalSeries& b) { return a -= b; }
  friend RationalSeries operator-(const RationalSeries& a) {
    RationalSeries r(a.order_);
    for (int k = 0; k <= a.order_; ++k) r.c_[k] = -a.c_[k];
    return r;
  }

  friend RationalSeries operator*(const RationalSeries& a, const RationalSeries& b) {
    a.check(b);
    RationalSeries r(a.order_);
    for (int i = 0; i <= a.order_; ++i) {
      if (a.c_[i] == 0) continue;
      for (int j = 0; i + j <= a.order_; ++j) {
        if (b.c_[j] == 0) continue;
        r.c_[i + j] += a.c_[i] * b.c_[j];
      }
    }
    return r;
  }
  RationalSeries& operator*=(const RationalSeries& o) { return *this = *this * o; }
  RationalSeries& operator*=(const rat& s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  friend RationalSeries operator*(RationalSeries a, const rat& s) { return a *= s; }
  friend RationalSeries operator*(const rat& s, RationalSeries a) { return a *= s; }

  /// 1/this; requires a nonzero constant term.
  RationalSeries inverse() const {
    if (c_[0] == 0)
      raise(ErrorCode::InvalidArgument, "RationalSeries: inverse of series with zero constant term");
    RationalSeries r(order_);
    r.c_[0] = rat(1) / c_[0];
    for (int k = 1; k <= order_; ++k) {
      rat s(0);
      for (int j = 1; j <= k; ++j) s += c_[j] * r.c_[k - j];
      r.c_[k] = -s / c_[0];
    }
    return r;
  }
  friend RationalSeries operator/(const RationalSeries& a, const RationalSeries& b) {
    return a * b.inverse();
  }

  /// Multiply by lambda^j (drops overflowing coefficients).
  RationalSeries shifted(int j) const {
    RationalSeries r(order_);
    for (int k = 0; k + j <= order_; ++k) r.c_[k + j] = c_[k];
    return r;
  }

  bool is_zero() const {
    for (const auto& x : c_)
      if (x != 0) return false;
    return true;
  }

  double eval_double(double lambda) const {
    double acc = 0;
    for (int k = order_; k >= 0; --k) acc = acc * lambda + c_[k].convert_to<double>();
    return acc;
  }

 private:
  void check(const RationalSeries& o) const {
    if (o.order_ != order_)
      raise(ErrorCode::InvalidArgument, "RationalSeries: mixed truncation orders");
  }
  std::vector<rat> c_;
  int order_;
};

}  // namespace lsz
