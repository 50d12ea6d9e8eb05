#pragma once

// Truncated multivariate Taylor jets of total order 4.
//
// A Jet<N> holds the normalized Taylor coefficients d^a f / a! of a scalar
// function of N variables at a fixed point, one per multi-index a with
// |a| <= 4. Multi-indices are enumerated in graded lexicographic order:
// by total degree, then lexicographically descending in the exponent tuple,
// so for N = 2 the order is 1, x, y, x^2, xy, y^2, x^3, ...
//
// Every jet also carries a valid order k <= 4. Coefficients of degree > k
// are unknown (and stored as zero). Differentiation lowers k by one and
// binary operations take the minimum, which lets derived quantities such as
// a second fundamental form be carried as jets and differentiated again
// without ever reading meaningless coefficients.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitension/error.hpp"

namespace bitension {

inline constexpr int kJetOrder = 4;
inline constexpr int kMaxJetVars = 6;

constexpr int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

namespace detail {

template <int N>
struct JetTables {
  using MultiIndex = std::array<int, N>;

  struct Product {
    int out;
    int lhs;
    int rhs;
  };
  struct DerivativeSource {
    int index;  // coefficient index of a + e_v, or -1 past the order
    double factor;
  };

  static constexpr int kSize = binomial(N + kJetOrder, kJetOrder);

  std::vector<MultiIndex> indices;
  std::vector<int> degree;
  // degree_end[d] = number of coefficients with degree <= d.
  std::array<int, kJetOrder + 1> degree_end{};
  // Products sorted by output degree; product_end[d] bounds those with
  // output degree <= d.
  std::vector<Product> products;
  std::array<int, kJetOrder + 1> product_end{};
  std::array<std::array<DerivativeSource, kSize>, N> derivative{};

  static const JetTables& get() {
    static const JetTables tables;
    return tables;
  }

  int find(const MultiIndex& a) const {
    int total = 0;
    for (int v : a) total += v;
    if (total > kJetOrder) return -1;
    const int begin = total == 0 ? 0 : degree_end[total - 1];
    for (int i = begin; i < degree_end[total]; ++i) {
      if (indices[i] == a) return i;
    }
    return -1;
  }

 private:
  JetTables() {
    for (int d = 0; d <= kJetOrder; ++d) {
      MultiIndex current{};
      enumerate(d, 0, current);
      degree_end[d] = static_cast<int>(indices.size());
    }
    for (int r = 0; r < kSize; ++r) {
      for (int i = 0; i < kSize; ++i) {
        if (degree[i] > degree[r]) break;
        MultiIndex rest{};
        bool ok = true;
        for (int v = 0; v < N; ++v) {
          rest[v] = indices[r][v] - indices[i][v];
          if (rest[v] < 0) ok = false;
        }
        if (!ok) continue;
        products.push_back({r, i, find(rest)});
      }
      product_end[degree[r]] = static_cast<int>(products.size());
    }
    for (int v = 0; v < N; ++v) {
      for (int r = 0; r < kSize; ++r) {
        MultiIndex up = indices[r];
        up[v] += 1;
        const int src = find(up);
        derivative[v][r] = {src, static_cast<double>(up[v])};
      }
    }
  }

  void enumerate(int remaining, int var, MultiIndex& current) {
    if (var == N - 1) {
      current[var] = remaining;
      indices.push_back(current);
      int total = 0;
      for (int v : current) total += v;
      degree.push_back(total);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[var] = e;
      enumerate(remaining - e, var + 1, current);
    }
    current[var] = 0;
  }
};

}  // namespace detail

template <int N>
class Jet {
  static_assert(N >= 1 && N <= kMaxJetVars, "Jet supports 1..6 variables");

 public:
  using MultiIndex = std::array<int, N>;
  static constexpr int kVars = N;
  static constexpr int kOrder = kJetOrder;
  static constexpr int kSize = binomial(N + kJetOrder, kJetOrder);
  using Coefficients = std::array<double, kSize>;

  Jet() { coeffs_.fill(0.0); }
  Jet(double constant) {  // NOLINT(google-explicit-constructor)
    coeffs_.fill(0.0);
    coeffs_[0] = constant;
  }

  /// Jet of the coordinate function u_index at a point where u_index = value.
  static Jet variable(int index, double value) {
    if (index < 0 || index >= N) {
      throw std::out_of_range("seed index " + std::to_string(index) + " outside [0, " +
                              std::to_string(N) + ")");
    }
    Jet j(value);
    j.coeffs_[1 + index] = 1.0;
    return j;
  }

  static Jet from_coefficients(const Coefficients& c, int order = kJetOrder) {
    Jet j;
    j.order_ = order;
    const int end = tables().degree_end[order];
    for (int i = 0; i < end; ++i) j.coeffs_[i] = c[i];
    return j;
  }

  static const std::vector<MultiIndex>& multi_indices() { return tables().indices; }
  static int index_of(const MultiIndex& a) { return tables().find(a); }
  static int degree_of(int index) { return tables().degree[index]; }

  double value() const { return coeffs_[0]; }
  int order() const { return order_; }
  const Coefficients& coefficients() const { return coeffs_; }
  double operator[](int i) const { return coeffs_[i]; }

  double coeff(const MultiIndex& a) const {
    const int i = index_of(a);
    if (i < 0) throw std::out_of_range("multi-index beyond jet order");
    return coeffs_[i];
  }

  /// Raw partial derivative d^a f at the expansion point.
  double partial(const MultiIndex& a) const {
    double factorial = 1.0;
    for (int v : a) {
      for (int k = 2; k <= v; ++k) factorial *= k;
    }
    return coeff(a) * factorial;
  }

  Jet derivative(int var) const {
    if (order_ == 0) throw std::logic_error("cannot differentiate an order-0 jet");
    const auto& t = tables();
    Jet r;
    r.order_ = order_ - 1;
    const int end = t.degree_end[r.order_];
    for (int i = 0; i < end; ++i) {
      const auto& src = t.derivative[var][i];
      r.coeffs_[i] = src.factor * coeffs_[src.index];
    }
    return r;
  }

  /// Limit the valid order, discarding higher coefficients.
  Jet truncated(int order) const {
    Jet r = *this;
    r.order_ = std::min(order_, order);
    const int end = tables().degree_end[r.order_];
    for (int i = end; i < kSize; ++i) r.coeffs_[i] = 0.0;
    return r;
  }

  Jet& operator+=(const Jet& o) {
    order_ = std::min(order_, o.order_);
    const int end = tables().degree_end[order_];
    for (int i = 0; i < end; ++i) coeffs_[i] += o.coeffs_[i];
    for (int i = end; i < kSize; ++i) coeffs_[i] = 0.0;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    order_ = std::min(order_, o.order_);
    const int end = tables().degree_end[order_];
    for (int i = 0; i < end; ++i) coeffs_[i] -= o.coeffs_[i];
    for (int i = end; i < kSize; ++i) coeffs_[i] = 0.0;
    return *this;
  }
  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    coeffs_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
  }
  Jet& operator/=(double s) { return *this *= (1.0 / s); }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    const auto& t = tables();
    Jet r;
    r.order_ = std::min(a.order_, b.order_);
    const int end = t.product_end[r.order_];
    const auto* p = t.products.data();
    for (int k = 0; k < end; ++k) {
      r.coeffs_[p[k].out] += a.coeffs_[p[k].lhs] * b.coeffs_[p[k].rhs];
    }
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
  friend Jet operator/(double s, const Jet& b) { return s * recip(b); }
  friend Jet operator-(Jet a) {
    for (double& c : a.coeffs_) c = -c;
    return a;
  }

  /// f(x) for a univariate f with scaled derivatives d[k] = f^(k)(x0) / k!.
  friend Jet compose(const Jet& x, const std::array<double, kJetOrder + 1>& d) {
    Jet h = x;
    h.coeffs_[0] = 0.0;
    Jet r(d[kJetOrder]);
    r.order_ = x.order_;
    for (int k = kJetOrder - 1; k >= 0; --k) {
      r = r * h;
      r.coeffs_[0] += d[k];
    }
    return r;
  }

  friend Jet recip(const Jet& x) {
    const double x0 = x.value();
    if (x0 == 0.0) throw DomainError("reciprocal of a jet with zero value");
    std::array<double, kJetOrder + 1> d{};
    double p = 1.0 / x0;
    for (int k = 0; k <= kJetOrder; ++k) {
      d[k] = p;
      p *= -1.0 / x0;
    }
    return compose(x, d);
  }

  friend Jet sqrt(const Jet& x) {
    const double x0 = x.value();
    if (!(x0 > 0.0)) throw DomainError("sqrt of a jet with non-positive value " + std::to_string(x0));
    // binomial series of (x0 + h)^(1/2)
    std::array<double, kJetOrder + 1> d{};
    double coef = 1.0;
    double p = std::sqrt(x0);
    for (int k = 0; k <= kJetOrder; ++k) {
      d[k] = coef * p;
      coef *= (0.5 - k) / (k + 1);
      p /= x0;
    }
    return compose(x, d);
  }

  friend Jet sin(const Jet& x) {
    const double s = std::sin(x.value());
    const double c = std::cos(x.value());
    return compose(x, {s, c, -s / 2.0, -c / 6.0, s / 24.0});
  }

  friend Jet cos(const Jet& x) {
    const double s = std::sin(x.value());
    const double c = std::cos(x.value());
    return compose(x, {c, -s, -c / 2.0, s / 6.0, c / 24.0});
  }

  friend Jet exp(const Jet& x) {
    const double e = std::exp(x.value());
    return compose(x, {e, e, e / 2.0, e / 6.0, e / 24.0});
  }

  friend Jet pow(const Jet& x, int k) {
    if (k < 0) return recip(pow(x, -k));
    Jet r(1.0);
    r.order_ = x.order_;
    Jet base = x;
    while (k > 0) {
      if (k & 1) r = r * base;
      k >>= 1;
      if (k > 0) base = base * base;
    }
    return r;
  }

 private:
  static const detail::JetTables<N>& tables() { return detail::JetTables<N>::get(); }

  Coefficients coeffs_;
  int order_ = kJetOrder;
};

template <int N>
Jet<N> seed_variable(int index, double value) {
  return Jet<N>::variable(index, value);
}

template <int N>
Jet<N> dot(const std::vector<Jet<N>>& a, const std::vector<Jet<N>>& b) {
  Jet<N> r;
  for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}

}  // namespace bitension
