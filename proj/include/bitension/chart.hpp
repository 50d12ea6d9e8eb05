#pragma once

// Parametric immersions u -> phi(u) of a box U in R^m into the unit sphere
// S^n in R^{n+1}, either from the built-in catalog or from parsed
// expressions, evaluated as order-4 jets at interior points.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bitension/error.hpp"
#include "bitension/expr.hpp"
#include "bitension/jet.hpp"

namespace bitension {

inline constexpr int kMaxDomainDim = kMaxJetVars;
inline constexpr int kMaxAmbientDim = 8;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// Resolved catalog parameters. Which fields are meaningful depends on kind.
struct CatalogInstance {
  enum class Kind { SmallHypersphere, ProductSpheres, CliffordTorus, Veronese };
  Kind kind = Kind::SmallHypersphere;
  std::string tag;
  int m1 = 0;
  int m2 = 0;
  int n1 = 0;  // product factors live in S^{n_i}(r_i) in R^{n_i + 1}
  int n2 = 0;
  int pad = 0;  // leading zero coordinates
  double r1 = 0.0;
  double r2 = 0.0;
};

struct ChartSpec {
  std::string name;
  int m = 0;
  int n = 0;
  std::optional<CatalogInstance> catalog;
  std::vector<Expr> expressions;
  std::vector<std::string> expression_sources;
  std::vector<Interval> domain;
  ParamMap params;
  bool normalize = false;

  double singular_margin = 0.05;
  double rank_tol = 1e-8;
  double sphere_tol = 1e-10;

  bool is_catalog() const { return catalog.has_value(); }
  bool is_hypersurface() const { return n == m + 1; }
};

struct CatalogEntry {
  std::string tag;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> params;  // name, meaning/default
};

inline const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = {
      {"small-hypersphere",
       "S^m(r) in S^{m+1}, last coordinate sqrt(1 - r^2)",
       {{"m", "dimension, 1..6 (default 2)"}, {"r", "radius in (0, 1] (default 1/sqrt(2))"}}},
      {"product-spheres",
       "S^m1(r1) x S^m2(r2) in S^{m1+m2+1}",
       {{"m1", "dimension of first factor (default 2)"},
        {"m2", "dimension of second factor (default 1)"},
        {"r1", "radius of first factor (default 1/sqrt(2))"},
        {"r2", "radius of second factor (default sqrt(1 - r1^2))"}}},
      {"clifford-torus-b3",
       "flat torus (a cos u, a sin u, b cos v, b sin v, sqrt(1 - a^2 - b^2)) in S^4",
       {{"a", "first radius (default 1/2)"},
        {"b", "second radius (default a)"},
        {"n", "ambient sphere dimension >= 4, extra coordinates are zero (default 4)"}}},
      {"veronese",
       "Veronese surface in S^4(r) in S^5",
       {{"r", "radius in (0, 1] (default 1/sqrt(2))"},
        {"n", "ambient sphere dimension >= 5, extra coordinates are zero (default 5)"}}},
      {"generalized-clifford",
       "equators S^m_i(r_i) in S^n_i(r_i), product in S^{n1+n2+1}",
       {{"m1", "first factor dimension (default 2)"},
        {"m2", "second factor dimension (default 4)"},
        {"r1", "first radius (default 1/sqrt(2))"},
        {"r2", "second radius (default sqrt(1 - r1^2))"},
        {"n1", "first host sphere dimension >= m1 (default m1)"},
        {"n2", "second host sphere dimension >= m2 (default m2)"}}},
  };
  return entries;
}

namespace detail {

inline std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

inline double param_or(const ParamMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline int int_param(const ParamMap& p, const std::string& key, int fallback) {
  const double v = param_or(p, key, fallback);
  if (std::floor(v) != v) throw ChartError("parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

inline void check_known(const ParamMap& p, std::initializer_list<const char*> known,
                        const std::string& tag) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw ChartError("unknown parameter '" + k + "' for catalog entry " + tag);
  }
}

inline void check_radius(double r, const char* name) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw ChartError(std::string("parameter ") + name + " = " + std::to_string(r) +
                     " outside (0, 1]");
  }
}

// Resolve r2 from r1 unless given. When both are given they must lie on
// the unit circle to 1e-6 and are rescaled onto it exactly.
inline std::pair<double, double> product_radii(const ParamMap& p) {
  const double r1 = param_or(p, "r1", 1.0 / std::sqrt(2.0));
  if (!(r1 > 0.0 && r1 < 1.0)) throw ChartError("parameter r1 outside (0, 1)");
  if (!p.count("r2")) return {r1, std::sqrt(1.0 - r1 * r1)};
  const double r2 = p.at("r2");
  if (!(r2 > 0.0 && r2 < 1.0)) throw ChartError("parameter r2 outside (0, 1)");
  const double s = std::hypot(r1, r2);
  if (std::abs(s * s - 1.0) > 1e-6) {
    throw ChartError("product radii must satisfy r1^2 + r2^2 = 1 (got " + std::to_string(s * s) + ")");
  }
  return {r1 / s, r2 / s};
}

// Spherical coordinates on the unit S^k: k angles, k + 1 outputs.
template <typename T>
void sphere_coords(std::span<const T> angle, std::vector<T>& out, double radius) {
  using std::cos;
  using std::sin;
  const int k = static_cast<int>(angle.size());
  T prefix(radius);
  for (int j = 0; j < k; ++j) {
    out.push_back(prefix * cos(angle[j]));
    prefix = prefix * sin(angle[j]);
  }
  out.push_back(prefix);
}

// With four or more nested polar angles the metric near the poles is too
// ill-conditioned for fourth-order quantities; those boxes stay 0.2 away.
inline std::vector<Interval> sphere_domain(int k) {
  const double inset = k >= 5 ? 0.2 : 0.0;
  std::vector<Interval> d;
  for (int j = 0; j + 1 < k; ++j) d.push_back({inset, M_PI - inset});
  d.push_back({0.0, 2.0 * M_PI});
  return d;
}

template <typename T>
std::vector<T> catalog_eval(const CatalogInstance& c, std::span<const T> u) {
  using std::cos;
  using std::sin;
  using K = CatalogInstance::Kind;
  std::vector<T> out(c.pad, T(0.0));
  switch (c.kind) {
    case K::SmallHypersphere:
      sphere_coords(u, out, c.r1);
      out.push_back(T(std::sqrt(1.0 - c.r1 * c.r1)));
      break;
    case K::ProductSpheres:
      sphere_coords(u.subspan(0, c.m1), out, c.r1);
      for (int i = c.m1; i < c.n1; ++i) out.push_back(T(0.0));
      sphere_coords(u.subspan(c.m1, c.m2), out, c.r2);
      for (int i = c.m2; i < c.n2; ++i) out.push_back(T(0.0));
      break;
    case K::CliffordTorus:
      out.push_back(c.r1 * cos(u[0]));
      out.push_back(c.r1 * sin(u[0]));
      out.push_back(c.r2 * cos(u[1]));
      out.push_back(c.r2 * sin(u[1]));
      out.push_back(T(std::sqrt(std::max(0.0, 1.0 - c.r1 * c.r1 - c.r2 * c.r2))));
      break;
    case K::Veronese: {
      const double s3 = std::sqrt(3.0);
      const T st = sin(u[0]);
      const T x = s3 * st * cos(u[1]);
      const T y = s3 * st * sin(u[1]);
      const T z = s3 * cos(u[0]);
      const double r = c.r1;
      out.push_back((r / s3) * (y * z));
      out.push_back((r / s3) * (x * z));
      out.push_back((r / s3) * (x * y));
      out.push_back((r / (2.0 * s3)) * (x * x - y * y));
      out.push_back((r / 6.0) * (x * x + y * y - 2.0 * (z * z)));
      out.push_back(T(std::sqrt(1.0 - r * r)));
      break;
    }
  }
  return out;
}

}  // namespace detail

inline void validate_chart(const ChartSpec& c) {
  if (c.m < 1 || c.m > kMaxDomainDim) {
    throw ChartError("domain dimension m = " + std::to_string(c.m) + " outside 1.." +
                     std::to_string(kMaxDomainDim));
  }
  if (c.n <= c.m || c.n > kMaxAmbientDim) {
    throw ChartError("ambient dimension n = " + std::to_string(c.n) + " must satisfy m < n <= " +
                     std::to_string(kMaxAmbientDim));
  }
  if (static_cast<int>(c.domain.size()) != c.m) {
    throw ChartError("expected " + std::to_string(c.m) + " domain intervals, got " +
                     std::to_string(c.domain.size()));
  }
  for (const auto& iv : c.domain) {
    if (!(iv.hi - iv.lo > 2.0 * c.singular_margin)) {
      throw ChartError("domain interval narrower than twice the singular margin");
    }
  }
  if (!c.is_catalog() && static_cast<int>(c.expressions.size()) != c.n + 1) {
    throw ChartError("expected " + std::to_string(c.n + 1) + " components, got " +
                     std::to_string(c.expressions.size()));
  }
}

/// Closed-form chart for a catalog tag. Missing parameters take defaults.
inline ChartSpec catalog_chart(const std::string& tag, const ParamMap& params = {}) {
  using K = CatalogInstance::Kind;
  ChartSpec spec;
  spec.name = tag;
  spec.params = params;
  CatalogInstance c;
  c.tag = tag;
  if (tag == "small-hypersphere") {
    detail::check_known(params, {"m", "r"}, tag);
    c.kind = K::SmallHypersphere;
    spec.m = detail::int_param(params, "m", 2);
    c.r1 = detail::param_or(params, "r", 1.0 / std::sqrt(2.0));
    detail::check_radius(c.r1, "r");
    spec.n = spec.m + 1;
    if (spec.m >= 1) spec.domain = detail::sphere_domain(spec.m);
  } else if (tag == "product-spheres" || tag == "generalized-clifford") {
    const bool general = tag == "generalized-clifford";
    if (general) {
      detail::check_known(params, {"m1", "m2", "r1", "r2", "n1", "n2"}, tag);
    } else {
      detail::check_known(params, {"m1", "m2", "r1", "r2"}, tag);
    }
    c.kind = K::ProductSpheres;
    c.m1 = detail::int_param(params, "m1", 2);
    c.m2 = detail::int_param(params, "m2", general ? 4 : 1);
    if (c.m1 < 1 || c.m2 < 1) throw ChartError("factor dimensions must be >= 1");
    c.n1 = general ? detail::int_param(params, "n1", c.m1) : c.m1;
    c.n2 = general ? detail::int_param(params, "n2", c.m2) : c.m2;
    if (c.n1 < c.m1 || c.n2 < c.m2) throw ChartError("host sphere dimension below factor dimension");
    std::tie(c.r1, c.r2) = detail::product_radii(params);
    spec.m = c.m1 + c.m2;
    spec.n = c.n1 + c.n2 + 1;
    spec.domain = detail::sphere_domain(c.m1);
    for (const auto& iv : detail::sphere_domain(c.m2)) spec.domain.push_back(iv);
  } else if (tag == "clifford-torus-b3") {
    detail::check_known(params, {"a", "b", "n"}, tag);
    c.kind = K::CliffordTorus;
    c.r1 = detail::param_or(params, "a", 0.5);
    c.r2 = detail::param_or(params, "b", c.r1);
    if (!(c.r1 > 0.0 && c.r2 > 0.0)) throw ChartError("torus radii must be positive");
    if (c.r1 * c.r1 + c.r2 * c.r2 > 1.0) throw ChartError("torus radii violate a^2 + b^2 <= 1");
    spec.m = 2;
    spec.n = detail::int_param(params, "n", 4);
    if (spec.n < 4) throw ChartError("clifford-torus-b3 needs n >= 4");
    c.pad = spec.n - 4;
    spec.domain = {{0.0, 2.0 * M_PI}, {0.0, 2.0 * M_PI}};
  } else if (tag == "veronese") {
    detail::check_known(params, {"r", "n"}, tag);
    c.kind = K::Veronese;
    c.r1 = detail::param_or(params, "r", 1.0 / std::sqrt(2.0));
    detail::check_radius(c.r1, "r");
    spec.m = 2;
    spec.n = detail::int_param(params, "n", 5);
    if (spec.n < 5) throw ChartError("veronese needs n >= 5");
    c.pad = spec.n - 5;
    spec.domain = {{0.0, M_PI}, {0.0, 2.0 * M_PI}};
  } else {
    throw ChartError("unknown catalog entry '" + tag + "'");
  }
  spec.catalog = c;
  validate_chart(spec);
  return spec;
}

/// Chart from expression strings over u1..um.
inline ChartSpec expression_chart(std::string name, int m, int n,
                                  const std::vector<std::string>& components,
                                  std::vector<Interval> domain, ParamMap params = {},
                                  bool normalize = false) {
  ChartSpec spec;
  spec.name = std::move(name);
  spec.m = m;
  spec.n = n;
  spec.domain = std::move(domain);
  spec.params = std::move(params);
  spec.normalize = normalize;
  if (m < 1 || m > kMaxDomainDim) {
    throw ChartError("domain dimension m = " + std::to_string(m) + " outside 1.." +
                     std::to_string(kMaxDomainDim));
  }
  if (static_cast<int>(components.size()) != n + 1) {
    throw ChartError("expected " + std::to_string(n + 1) + " components, got " +
                     std::to_string(components.size()));
  }
  std::set<std::string> names;
  for (const auto& [k, v] : spec.params) names.insert(k);
  for (std::size_t i = 0; i < components.size(); ++i) {
    try {
      spec.expressions.push_back(parse_expression(components[i], m, names));
    } catch (const ParseError& e) {
      throw ParseError("component " + std::to_string(i) + ": " +
                           std::string(e.what()).substr(0, std::string(e.what()).rfind(" at line")),
                       e.line(), e.column());
    }
  }
  spec.expression_sources = components;
  validate_chart(spec);
  return spec;
}

/// Same chart with one parameter changed (catalog charts are re-resolved).
inline ChartSpec with_param(const ChartSpec& chart, const std::string& key, double value) {
  ParamMap p = chart.params;
  p[key] = value;
  if (chart.is_catalog()) {
    ChartSpec c = catalog_chart(chart.catalog->tag, p);
    c.name = chart.name;
    c.singular_margin = chart.singular_margin;
    c.rank_tol = chart.rank_tol;
    c.sphere_tol = chart.sphere_tol;
    return c;
  }
  if (!chart.params.count(key)) throw ChartError("unknown parameter '" + key + "'");
  ChartSpec c = chart;
  c.params = std::move(p);
  return c;
}

/// Chart document: {name, m, n, expressions | catalog{tag, params}, domain, params, normalize}.
inline ChartSpec parse_chart(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ChartError("chart document must be a JSON object");
  try {
    const std::string name = doc.value("name", std::string("chart"));
    ParamMap params;
    if (doc.contains("params")) {
      for (const auto& [k, v] : doc.at("params").items()) params[k] = v.get<double>();
    }
    std::vector<Interval> domain;
    if (doc.contains("domain")) {
      for (const auto& iv : doc.at("domain")) {
        if (!iv.is_array() || iv.size() != 2) throw ChartError("domain entries must be [lo, hi] pairs");
        domain.push_back({iv[0].get<double>(), iv[1].get<double>()});
      }
    }
    const bool normalize = doc.value("normalize", false);
    const bool has_expr = doc.contains("expressions");
    const bool has_cat = doc.contains("catalog");
    if (has_expr == has_cat) throw ChartError("chart needs exactly one of 'expressions' or 'catalog'");
    if (has_cat) {
      const auto& cat = doc.at("catalog");
      ParamMap cparams;
      if (cat.contains("params")) {
        for (const auto& [k, v] : cat.at("params").items()) cparams[k] = v.get<double>();
      }
      ChartSpec spec = catalog_chart(cat.at("tag").get<std::string>(), cparams);
      spec.name = name;
      if (doc.contains("m") && doc.at("m").get<int>() != spec.m) throw ChartError("m does not match catalog entry");
      if (doc.contains("n") && doc.at("n").get<int>() != spec.n) throw ChartError("n does not match catalog entry");
      if (!domain.empty()) {
        spec.domain = domain;
        validate_chart(spec);
      }
      if (normalize) throw ChartError("catalog charts cannot be normalized");
      return spec;
    }
    if (!doc.contains("m") || !doc.contains("n")) throw ChartError("chart document needs 'm' and 'n'");
    if (!doc.contains("domain")) throw ChartError("chart document needs 'domain'");
    std::vector<std::string> comps;
    for (const auto& e : doc.at("expressions")) comps.push_back(e.get<std::string>());
    return expression_chart(name, doc.at("m").get<int>(), doc.at("n").get<int>(), comps, domain,
                            params, normalize);
  } catch (const nlohmann::json::exception& e) {
    throw ChartError(std::string("malformed chart document: ") + e.what());
  }
}

inline ChartSpec load_chart_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ChartError("cannot read chart file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ChartError("chart file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_chart(doc);
}

inline nlohmann::json chart_to_json(const ChartSpec& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["m"] = c.m;
  j["n"] = c.n;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  if (c.is_catalog()) {
    j["catalog"] = {{"tag", c.catalog->tag}, {"params", params}};
  } else {
    j["expressions"] = c.expression_sources;
    j["params"] = params;
  }
  nlohmann::json dom = nlohmann::json::array();
  for (const auto& iv : c.domain) dom.push_back({iv.lo, iv.hi});
  j["domain"] = dom;
  j["normalize"] = c.normalize;
  return j;
}

/// Order-4 jets of the n + 1 ambient components at `point`. `margin`
/// overrides the chart's singular margin (finite-difference stencils use a
/// smaller one).
template <int N>
std::vector<Jet<N>> eval_jet(const ChartSpec& chart, std::span<const double> point,
                             std::optional<double> margin = std::nullopt) {
  if (chart.m != N) throw std::logic_error("eval_jet: jet dimension does not match chart");
  if (static_cast<int>(point.size()) != N) throw ChartError("point dimension does not match chart");
  const double inset = margin.value_or(chart.singular_margin);
  for (int i = 0; i < N; ++i) {
    const auto& iv = chart.domain[i];
    if (!(point[i] >= iv.lo + inset && point[i] <= iv.hi - inset)) {
      throw ChartError("point " + detail::format_point(point) +
                       " outside the safe region of the domain box");
    }
  }
  std::vector<Jet<N>> u;
  for (int i = 0; i < N; ++i) u.push_back(Jet<N>::variable(i, point[i]));
  std::vector<Jet<N>> phi;
  try {
    if (chart.is_catalog()) {
      phi = detail::catalog_eval<Jet<N>>(*chart.catalog, std::span<const Jet<N>>(u));
    } else {
      for (const auto& e : chart.expressions) {
        phi.push_back(evaluate<Jet<N>>(e, std::span<const Jet<N>>(u), chart.params));
      }
    }
    if (chart.normalize) {
      const Jet<N> norm2 = dot(phi, phi);
      if (std::sqrt(norm2.value()) < 1e-6) {
        throw ChartError("cannot normalize near-zero chart value at " + detail::format_point(point));
      }
      const Jet<N> inv = recip(sqrt(norm2));
      for (auto& c : phi) c = c * inv;
    }
  } catch (const DomainError& e) {
    throw ChartError(std::string("chart evaluation failed at ") + detail::format_point(point) +
                     ": " + e.what());
  }
  double norm2 = 0.0;
  for (const auto& c : phi) norm2 += c.value() * c.value();
  if (std::abs(std::sqrt(norm2) - 1.0) > chart.sphere_tol) {
    throw ChartError("chart leaves the unit sphere at " + detail::format_point(point) +
                     ": |phi| = " + std::to_string(std::sqrt(norm2)) +
                     " (set normalize to project radially)");
  }
  return phi;
}

/// Plain ambient position phi(point).
inline std::vector<double> eval_point(const ChartSpec& chart, std::span<const double> point,
                                      std::optional<double> margin = std::nullopt);

namespace detail {
template <int N>
std::vector<double> eval_point_impl(const ChartSpec& chart, std::span<const double> point,
                                    std::optional<double> margin) {
  std::vector<double> out;
  for (const auto& j : eval_jet<N>(chart, point, margin)) out.push_back(j.value());
  return out;
}
}  // namespace detail

inline std::vector<double> eval_point(const ChartSpec& chart, std::span<const double> point,
                                      std::optional<double> margin) {
  switch (chart.m) {
    case 1: return detail::eval_point_impl<1>(chart, point, margin);
    case 2: return detail::eval_point_impl<2>(chart, point, margin);
    case 3: return detail::eval_point_impl<3>(chart, point, margin);
    case 4: return detail::eval_point_impl<4>(chart, point, margin);
    case 5: return detail::eval_point_impl<5>(chart, point, margin);
    case 6: return detail::eval_point_impl<6>(chart, point, margin);
    default: throw ChartError("unsupported domain dimension");
  }
}

/// Deterministic low-discrepancy points (Kronecker sequence with a seeded
/// offset) inside the domain box, inset by the singular margin.
inline std::vector<std::vector<double>> sample_points(const ChartSpec& chart, int count,
                                                      std::uint64_t seed) {
  if (count <= 0) throw ChartError("sample count must be positive");
  const int m = chart.m;
  // Generalized golden ratio: root of x^{m+1} = x + 1.
  double g = 2.0;
  for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / (m + 1));
  std::vector<double> alpha(m);
  double a = 1.0;
  for (int i = 0; i < m; ++i) {
    a /= g;
    alpha[i] = a;
  }
  auto splitmix = [state = seed]() mutable {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  std::vector<double> offset(m);
  for (int i = 0; i < m; ++i) offset[i] = static_cast<double>(splitmix() >> 11) * 0x1.0p-53;

  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) {
    std::vector<double> p(m);
    for (int i = 0; i < m; ++i) {
      double t = offset[i] + (k + 1) * alpha[i];
      t -= std::floor(t);
      const double lo = chart.domain[i].lo + chart.singular_margin;
      const double hi = chart.domain[i].hi - chart.singular_margin;
      p[i] = lo + t * (hi - lo);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace bitension
