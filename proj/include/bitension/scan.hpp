#pragma once

// One-parameter family sweeps and root refinement of the aggregate residual
// F(t) = max over samples of |tau2| for the chart at parameter value t.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bitension/biharmonic.hpp"
#include "bitension/chart.hpp"
#include "bitension/parallel.hpp"

namespace bitension {

struct FamilySpec {
  ChartSpec base;
  std::string param_name;
  Interval range;
  int steps = 200;
  int samples_per_point = 16;
  std::uint64_t seed = 42;
  Tolerances tol;
  int verify_points = 64;
  long budget = 1'000'000;  // cap on steps * samples_per_point
  double param_tol = 1e-8;
  int threads = 0;
};

struct GridRow {
  double param = 0.0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double H_norm = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<std::string> error;  // flagged point
};

enum class RootClass { ProperBiharmonic, Minimal };

inline const char* to_string(RootClass c) {
  return c == RootClass::Minimal ? "minimal" : "proper-biharmonic";
}

struct ScanRoot {
  double param = 0.0;
  double residual = 0.0;  // refined residual at the root, verification sample set
  double H_norm = 0.0;
  double B_norm2 = 0.0;
  RootClass classification = RootClass::ProperBiharmonic;
  Verdict verdict = Verdict::Inconclusive;
  int iterations = 0;
};

struct BoundaryEntry {
  double param = 0.0;
  double residual = 0.0;
  double H_norm = 0.0;
  std::string label;
};

struct ScanResult {
  FamilySpec family;
  std::vector<GridRow> grid;
  std::vector<ScanRoot> roots;
  std::vector<BoundaryEntry> boundary;
};

inline void validate_family(const FamilySpec& f) {
  if (f.param_name.empty()) throw ChartError("family needs a free parameter name");
  if (!(f.range.lo < f.range.hi)) throw ChartError("family range needs lo < hi");
  if (f.steps < 8) throw ChartError("family scan needs at least 8 steps");
  if (f.samples_per_point <= 0) throw ChartError("samples per point must be positive");
  if (f.verify_points <= 0) throw ChartError("verification sample count must be positive");
  if (static_cast<long>(f.steps) * f.samples_per_point > f.budget) {
    throw ChartError("scan exceeds the evaluation budget (" + std::to_string(f.budget) + " samples)");
  }
  // Both endpoints must give admissible charts.
  with_param(f.base, f.param_name, f.range.lo);
  with_param(f.base, f.param_name, f.range.hi);
}

namespace detail {

struct Profile {
  double max = 0.0;
  double mean = 0.0;
  double H_max = 0.0;
  Verdict verdict = Verdict::Inconclusive;
};

inline Profile profile_at(const FamilySpec& f, double t, int points) {
  EvalOptions opt;
  opt.points = points;
  opt.seed = f.seed;
  opt.tol = f.tol;
  opt.threads = 1;
  const ResidualReport rep = evaluate_chart(with_param(f.base, f.param_name, t), opt);
  return {rep.tau2_direct_max, rep.tau2_direct_mean, rep.H_norm.max, rep.verdict};
}

inline double residual_at(const FamilySpec& f, double t) {
  try {
    return profile_at(f, t, f.samples_per_point).max;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline double mean_curvature_at(const FamilySpec& f, double t) {
  try {
    return profile_at(f, t, f.samples_per_point).H_max;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Minimise F on [lo, hi]: bisection on the sign of a central difference,
// golden-section steps where the difference vanishes.
template <typename Fn>
std::pair<double, int> refine_minimum(const FamilySpec& f, Fn&& F, double lo, double hi) {
  constexpr double kProbe = 1e-10;
  constexpr double kInvPhi = 0.6180339887498949;
  int iter = 0;
  while (hi - lo > f.param_tol && iter < 200) {
    ++iter;
    const double c = 0.5 * (lo + hi);
    const double slope = F(c + kProbe) - F(c - kProbe);
    if (slope > 0) {
      hi = c;
    } else if (slope < 0) {
      lo = c;
    } else {
      const double x1 = hi - kInvPhi * (hi - lo);
      const double x2 = lo + kInvPhi * (hi - lo);
      if (F(x1) <= F(x2)) {
        hi = x2;
      } else {
        lo = x1;
      }
    }
  }
  return {0.5 * (lo + hi), iter};
}

}  // namespace detail

/// Residual profile on a uniform grid of steps + 1 points, interior local
/// minima refined and re-verified, endpoint minima reported separately.
inline ScanResult sweep(const FamilySpec& family) {
  validate_family(family);
  ScanResult out;
  out.family = family;
  const int count = family.steps + 1;
  const double lo = family.range.lo;
  const double width = family.range.hi - family.range.lo;
  out.grid.resize(count);
  parallel_for(
      count,
      [&](int k) {
        GridRow& row = out.grid[k];
        row.param = k == family.steps ? family.range.hi : lo + width * k / family.steps;
        try {
          const auto p = detail::profile_at(family, row.param, family.samples_per_point);
          row.max_residual = p.max;
          row.mean_residual = p.mean;
          row.H_norm = p.H_max;
          row.verdict = p.verdict;
        } catch (const Error& e) {
          row.error = e.what();
          row.max_residual = std::numeric_limits<double>::infinity();
        }
      },
      family.threads);

  auto ok = [&](int k) { return !out.grid[k].error; };
  auto F = [&](int k) { return out.grid[k].max_residual; };

  std::vector<int> candidates;
  for (int k = 1; k + 1 < count; ++k) {
    if (!ok(k) || !ok(k - 1) || !ok(k + 1)) continue;
    if (F(k) <= F(k - 1) && F(k) < F(k + 1)) candidates.push_back(k);
  }
  std::vector<std::optional<ScanRoot>> refined(candidates.size());
  parallel_for(
      static_cast<int>(candidates.size()),
      [&](int c) {
        const int k = candidates[c];
        const double a = out.grid[k - 1].param;
        const double b = out.grid[k + 1].param;
        auto [t, iters] = detail::refine_minimum(
            family, [&](double x) { return detail::residual_at(family, x); }, a, b);
        EvalOptions opt;
        opt.points = family.verify_points;
        opt.seed = family.seed;
        opt.tol = family.tol;
        opt.threads = 1;
        auto verify = [&](double x) -> std::optional<ResidualReport> {
          try {
            return evaluate_chart(with_param(family.base, family.param_name, x), opt);
          } catch (const Error&) {
            return std::nullopt;
          }
        };
        auto rep = verify(t);
        if (!rep) return;
        // At a minimal member tau2 can vanish to second order, which leaves
        // the minimiser of F poorly determined; |H| vanishes linearly there.
        if (rep->verdict != Verdict::Minimal && rep->H_norm.max < family.tol.fail_tol) {
          const auto [th, ih] = detail::refine_minimum(
              family, [&](double x) { return detail::mean_curvature_at(family, x); }, a, b);
          auto rh = verify(th);
          if (rh && rh->verdict == Verdict::Minimal) {
            t = th;
            iters += ih;
            rep = std::move(rh);
          }
        }
        if (rep->verdict != Verdict::BiharmonicProper && rep->verdict != Verdict::Minimal) return;
        ScanRoot r;
        r.param = t;
        r.residual = rep->tau2_direct_max;
        r.H_norm = rep->H_norm.max;
        r.B_norm2 = rep->B_norm2.mean;
        r.verdict = rep->verdict;
        r.classification = rep->verdict == Verdict::Minimal ? RootClass::Minimal : RootClass::ProperBiharmonic;
        r.iterations = iters;
        refined[c] = r;
      },
      family.threads);
  for (auto& r : refined) {
    if (!r) continue;
    if (!out.roots.empty() && std::abs(out.roots.back().param - r->param) < 10 * family.param_tol) continue;
    out.roots.push_back(*r);
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const ScanRoot& a, const ScanRoot& b) { return a.param < b.param; });

  for (int k : {0, count - 1}) {
    const int nb = k == 0 ? 1 : count - 2;
    if (!ok(k) || !ok(nb) || F(k) > F(nb)) continue;
    const GridRow& row = out.grid[k];
    std::string label;
    if (row.verdict == Verdict::Minimal || row.verdict == Verdict::BiharmonicProper) {
      label = to_string(row.verdict);
    } else if (row.H_norm < out.grid[nb].H_norm) {
      label = "approaching-minimal";
    } else {
      label = "residual-decreasing";
    }
    out.boundary.push_back({row.param, row.max_residual, row.H_norm, label});
  }
  return out;
}

/// Radius sweep of the Veronese family in S^4(r) inside S^5.
inline ScanResult veronese_radius_scan(Interval range, int steps, int samples_per_point = 16,
                                       std::uint64_t seed = 42) {
  if (!(range.lo > 0.0 && range.lo < range.hi && range.hi <= 1.0)) {
    throw ChartError("veronese radius range must satisfy 0 < lo < hi <= 1");
  }
  FamilySpec f;
  f.base = catalog_chart("veronese");
  f.param_name = "r";
  f.range = range;
  f.steps = steps;
  f.samples_per_point = samples_per_point;
  f.seed = seed;
  return sweep(f);
}

}  // namespace bitension
