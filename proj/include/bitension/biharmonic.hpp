#pragma once

// Biharmonicity residuals for immersions into the unit sphere.
//
// Every residual is defined so that the corresponding characterization
// reads residual = 0:
//   direct      tau2 = -m (Delta H - m H)
//   split       normal  = Delta^perp H + trace B(., A_H .) - m H
//               tangent = 2 trace A_{nabla^perp_(.) H}(.) + (m/2) grad |H|^2
//   hypersurface  |Delta f - (m - |A|^2) f|,  |A grad f + (m/2) f grad f|
//   PMC         |trace B(A_H ., .) - m H|, <A_H, A_xi> for xi orthogonal to H,
//               ||A_H|^2 - m |H|^2|
// with tau2 = -m (normal + tangent).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bitension/chart.hpp"
#include "bitension/extrinsic.hpp"
#include "bitension/parallel.hpp"

namespace bitension {

struct Tolerances {
  double pass_tol = 1e-6;
  double fail_tol = 1e-3;
};

enum class Verdict { BiharmonicProper, Minimal, NotBiharmonic, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::BiharmonicProper: return "biharmonic-proper";
    case Verdict::Minimal: return "minimal";
    case Verdict::NotBiharmonic: return "not-biharmonic";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline Verdict verdict_from_string(const std::string& s) {
  if (s == "biharmonic-proper") return Verdict::BiharmonicProper;
  if (s == "minimal") return Verdict::Minimal;
  if (s == "not-biharmonic") return Verdict::NotBiharmonic;
  return Verdict::Inconclusive;
}

/// trace R(e_i, V) e_i for the unit-sphere curvature R(X, Y) Z = <Y, Z> X - <X, Z> Y.
inline Vec sphere_curvature_trace(const PointGeometry& geo, const Vec& V) {
  Vec out = Vec::Zero(V.size());
  for (int a = 0; a < geo.m; ++a) {
    const Vec e = geo.tangent_frame.col(a);
    out += V.dot(e) * e - e.dot(e) * V;
  }
  return out;
}

/// Bitension field; uses trace R(dphi ., H) dphi . = -m H on the unit sphere.
inline Vec tau2_direct(const PointGeometry& geo) {
  const double m = geo.m;
  return -m * (geo.laplacian_H - m * geo.H);
}

struct SplitResidual {
  Vec normal;
  Vec tangent;
};

inline SplitResidual split_residuals(const PointGeometry& geo) {
  const int m = geo.m;
  const Mat AH = geo.A_H();
  SplitResidual r;
  Vec trace_b = Vec::Zero(geo.n + 1);
  for (int al = 0; al < geo.codim(); ++al) {
    trace_b += AH.cwiseProduct(geo.second_form[al]).sum() * geo.normal_frame.col(al);
  }
  r.normal = geo.normal_laplacian_H + trace_b - m * geo.H;

  Vec tr = Vec::Zero(m);  // frame components of sum_a A_{nabla^perp_{e_a} H} e_a
  for (int a = 0; a < m; ++a) {
    const Mat A = geo.shape_operator(geo.nabla_perp_H.col(a));
    tr += A.row(a).transpose();
  }
  r.tangent = 2.0 * geo.tangent(tr) + 0.5 * m * geo.grad_H2;
  return r;
}

struct HypersurfaceResidual {
  double res_i = 0.0;
  double res_ii = 0.0;
};

inline HypersurfaceResidual hypersurface_residuals(const PointGeometry& geo) {
  if (!geo.hypersurface) throw GeometryError("hypersurface residuals need n = m + 1");
  const auto& hs = *geo.hypersurface;
  const double m = geo.m;
  HypersurfaceResidual r;
  r.res_i = std::abs(hs.laplacian_f - (m - geo.A_norm2) * hs.f);
  const Vec grad = geo.tangent_frame.transpose() * hs.grad_f;
  const Vec v = geo.second_form[0] * grad + 0.5 * m * hs.f * grad;
  r.res_ii = v.norm();
  return r;
}

/// Orthonormal normal vectors spanning the complement of H in the normal space.
inline std::vector<Vec> normal_complement_of_H(const PointGeometry& geo) {
  const Vec nu = geo.H / geo.H_norm;
  std::vector<Vec> out;
  for (int al = 0; al < geo.codim(); ++al) {
    Vec w = geo.normal_frame.col(al);
    w -= w.dot(nu) * nu;
    for (const auto& q : out) w -= w.dot(q) * q;
    const double nw = w.norm();
    if (nw > 1e-8) out.push_back(w / nw);
  }
  return out;
}

struct PmcSample {
  double parallel_norm = 0.0;
  double trace_identity = 0.0;
  std::optional<double> frame_cross;
  std::optional<double> frame_norm;
};

inline PmcSample pmc_sample(const PointGeometry& geo, double zero_tol) {
  PmcSample s;
  s.parallel_norm = geo.nabla_perp_H.norm();
  const Mat AH = geo.A_H();
  Vec t = -static_cast<double>(geo.m) * geo.H;
  for (int al = 0; al < geo.codim(); ++al) {
    t += AH.cwiseProduct(geo.second_form[al]).sum() * geo.normal_frame.col(al);
  }
  s.trace_identity = t.norm();
  if (geo.H_norm > zero_tol) {
    double worst = 0.0;
    for (const auto& xi : normal_complement_of_H(geo)) {
      worst = std::max(worst, std::abs(AH.cwiseProduct(geo.shape_operator(xi)).sum()));
    }
    s.frame_cross = worst;
    s.frame_norm = std::abs(AH.squaredNorm() - geo.m * geo.H_norm * geo.H_norm);
  }
  return s;
}

struct PmcBlock {
  double parallel_norm = 0.0;
  double trace_identity = 0.0;
  std::optional<double> frame_cross;
  std::optional<double> frame_norm;
  int zero_H_samples = 0;
  bool applicable = false;  // nabla^perp H vanishes at every sample
  bool trace_holds = false;
  bool frame_holds = false;
  bool equivalent = true;  // when applicable, trace and frame verdicts agree
};

inline PmcBlock pmc_check(std::span<const PointGeometry> samples, const Tolerances& tol = {}) {
  if (samples.empty()) throw GeometryError("PMC check needs at least one sample");
  PmcBlock b;
  for (const auto& geo : samples) {
    const PmcSample s = pmc_sample(geo, tol.pass_tol);
    b.parallel_norm = std::max(b.parallel_norm, s.parallel_norm);
    b.trace_identity = std::max(b.trace_identity, s.trace_identity);
    if (s.frame_cross) {
      b.frame_cross = std::max(b.frame_cross.value_or(0.0), *s.frame_cross);
      b.frame_norm = std::max(b.frame_norm.value_or(0.0), *s.frame_norm);
    } else {
      ++b.zero_H_samples;
    }
  }
  b.applicable = b.parallel_norm < tol.pass_tol;
  b.trace_holds = b.trace_identity < tol.pass_tol;
  b.frame_holds = b.frame_cross && b.frame_norm && std::max(*b.frame_cross, *b.frame_norm) < tol.pass_tol;
  if (b.applicable && b.frame_cross) b.equivalent = b.trace_holds == b.frame_holds;
  return b;
}

struct SampleResidual {
  std::vector<double> point;
  double tau2_direct_norm = 0.0;
  double split_normal_norm = 0.0;
  double split_tangent_norm = 0.0;
  double split_gap = 0.0;  // |tau2 + m (normal + tangent)| / (1 + |tau2|)
  std::optional<double> hyper_i;
  std::optional<double> hyper_ii;
  PmcSample pmc;
  double H_norm = 0.0;
  double A_norm2 = 0.0;
  double B_norm2 = 0.0;
  double scalar_curvature = 0.0;
  std::optional<double> f;
  double ah_slack = 0.0;
  double normalizer = 1.0;  // m (1 + |H|^2)
};

inline SampleResidual sample_residual(const PointGeometry& geo, double zero_tol) {
  SampleResidual s;
  s.point = geo.point;
  const Vec tau = tau2_direct(geo);
  const SplitResidual sp = split_residuals(geo);
  s.tau2_direct_norm = tau.norm();
  s.split_normal_norm = sp.normal.norm();
  s.split_tangent_norm = sp.tangent.norm();
  s.split_gap = (tau + geo.m * (sp.normal + sp.tangent)).norm() / (1.0 + s.tau2_direct_norm);
  if (geo.hypersurface) {
    const HypersurfaceResidual h = hypersurface_residuals(geo);
    s.hyper_i = h.res_i;
    s.hyper_ii = h.res_ii;
    s.f = geo.hypersurface->f;
  }
  s.pmc = pmc_sample(geo, zero_tol);
  s.H_norm = geo.H_norm;
  s.A_norm2 = geo.A_norm2;
  s.B_norm2 = geo.B_norm2;
  s.scalar_curvature = intrinsic_curvature(geo).scalar;
  s.ah_slack = ah_bound_slack(geo);
  s.normalizer = geo.m * (1.0 + geo.H_norm * geo.H_norm);
  return s;
}

struct Stat {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct AuditEntry {
  std::string name;
  double measured = 0.0;
  double predicted = 0.0;
  double deviation = 0.0;
  bool holds = false;
  std::string note;
};

struct ResidualReport {
  ChartSpec chart;
  std::uint64_t seed = 0;
  int samples_requested = 0;
  int samples_used = 0;
  std::vector<std::string> failures;
  std::vector<SampleResidual> per_sample;
  Tolerances tol;

  double tau2_direct_max = 0.0;
  double tau2_direct_mean = 0.0;
  double split_normal_max = 0.0;
  double split_tangent_max = 0.0;
  double split_gap_max = 0.0;
  double tau2_normalized_max = 0.0;
  double split_normal_normalized_max = 0.0;
  double split_tangent_normalized_max = 0.0;
  std::optional<double> hyper_i_max;
  std::optional<double> hyper_ii_max;
  bool hypersurface_agrees = true;
  PmcBlock pmc;

  Stat H_norm;
  Stat A_norm2;
  Stat B_norm2;
  Stat scalar_curvature;
  std::optional<Stat> f;
  double ah_slack_min = 0.0;
  bool minimal = false;

  Verdict verdict = Verdict::Inconclusive;
  std::vector<AuditEntry> audit;
};

/// Verdict from aggregated norms. minimal: |H| vanishes everywhere;
/// proper: tau2 vanishes everywhere and H nowhere; not-biharmonic: tau2
/// reaches fail_tol somewhere; anything else is inconclusive.
inline Verdict decide_verdict(double tau2_max, double H_max, double H_min, const Tolerances& tol) {
  if (H_max < tol.pass_tol) return Verdict::Minimal;
  if (tau2_max < tol.pass_tol && H_min > tol.pass_tol) return Verdict::BiharmonicProper;
  if (tau2_max >= tol.fail_tol) return Verdict::NotBiharmonic;
  return Verdict::Inconclusive;
}

namespace detail {

inline int residual_class(double value, const Tolerances& tol) {
  if (value < tol.pass_tol) return 0;
  if (value >= tol.fail_tol) return 2;
  return 1;
}

template <typename Get>
Stat stat_of(const std::vector<SampleResidual>& s, Get get) {
  Stat st{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& x : s) {
    const double v = get(x);
    st.min = std::min(st.min, v);
    st.max = std::max(st.max, v);
    st.mean += v;
  }
  st.mean /= static_cast<double>(s.size());
  return st;
}

}  // namespace detail

/// Checks the predicted invariants of a proper biharmonic report.
inline std::vector<AuditEntry> quantity_audit(const ResidualReport& rep) {
  std::vector<AuditEntry> out;
  if (rep.verdict != Verdict::BiharmonicProper) return out;
  const int m = rep.chart.m;
  const int n = rep.chart.n;
  const double tol = rep.tol.pass_tol;
  const bool cmc = rep.H_norm.max - rep.H_norm.min < tol;
  const double H = rep.H_norm.mean;

  if (cmc) {
    out.push_back({"mean_curvature_bound", rep.H_norm.max, 1.0, std::max(0.0, rep.H_norm.max - 1.0),
                   rep.H_norm.min > 0.0 && rep.H_norm.max <= 1.0 + tol, "CMC: |H| in (0, 1]"});
  }
  if (cmc && rep.chart.is_hypersurface()) {
    double dev_a = 0.0;
    double dev_s = 0.0;
    for (const auto& s : rep.per_sample) {
      dev_a = std::max(dev_a, std::abs(s.A_norm2 - m));
      const double pred = m * m * (1.0 + s.H_norm * s.H_norm) - 2.0 * m;
      dev_s = std::max(dev_s, std::abs(s.scalar_curvature - pred));
    }
    out.push_back({"A_norm2", rep.A_norm2.mean, static_cast<double>(m), dev_a, dev_a < tol, "|A|^2 = m"});
    out.push_back({"scalar_curvature", rep.scalar_curvature.mean, m * m * (1.0 + H * H) - 2.0 * m, dev_s,
                   dev_s < tol, "s = m^2 (1 + |H|^2) - 2m"});
    if (m > 2) {
      const double gap = (m - 2.0) / m;
      AuditEntry e{"mean_curvature_gap", H, gap, std::max(0.0, H - gap), false, {}};
      if (std::abs(H - 1.0) < tol) {
        e.holds = true;
        e.deviation = 0.0;
        e.note = "|H| = 1: small hypersphere";
      } else if (std::abs(H - gap) < tol) {
        e.holds = true;
        e.deviation = std::abs(H - gap);
        e.note = "boundary |H| = (m-2)/m: standard product S^{m-1} x S^1";
      } else {
        e.holds = H <= gap;
        e.note = e.holds ? "|H| in (0, (m-2)/m)" : "|H| in the forbidden gap ((m-2)/m, 1)";
      }
      out.push_back(e);
    }
  }
  if (rep.pmc.applicable) {
    const double b2 = rep.B_norm2.mean;
    const bool equal = std::abs(b2 - m) < tol;
    out.push_back({"B_norm2_lower_bound", rep.B_norm2.min, static_cast<double>(m),
                   std::max(0.0, m - rep.B_norm2.min), rep.B_norm2.min >= m - tol,
                   equal ? "equality m = |B|^2" : "m < |B|^2"});
    const int d = n - m;
    if (m >= 2 && d >= 2 && !equal) {
      const double h = H;
      const double bound = m * (d - 1.0) / (2.0 * d - 3.0) *
                           (1.0 + (3.0 * d - 4.0) / (d - 1.0) * h * h -
                            (m - 2.0) / std::sqrt(m - 1.0) * h * std::sqrt(std::max(0.0, 1.0 - h * h)));
      if (b2 > m && b2 <= bound + tol) {
        std::optional<double> predicted;
        if (m == 2 && d == 2) predicted = 6.0;
        if (m == 2 && d == 3) predicted = 14.0 / 3.0;
        if (m > 2 && d == 2) predicted = 3.0 * m;
        if (predicted) {
          double dev = 0.0;
          for (const auto& s : rep.per_sample) dev = std::max(dev, std::abs(s.B_norm2 - *predicted));
          out.push_back({"B_norm2_rigidity", b2, *predicted, dev, dev < tol && std::abs(H - 1.0) < tol,
                         "bounded |B|^2 PMC rigidity value (codimension " + std::to_string(d) + ")"});
        }
      }
    }
  }
  return out;
}

struct EvalOptions {
  int points = 64;
  std::uint64_t seed = 42;
  Tolerances tol;
  int threads = 0;
};

/// Aggregate per-sample residuals into a report (no geometry recomputation).
inline ResidualReport aggregate(const ChartSpec& chart, std::vector<SampleResidual> samples,
                                std::span<const PointGeometry> geos, const EvalOptions& opt) {
  ResidualReport rep;
  rep.chart = chart;
  rep.seed = opt.seed;
  rep.tol = opt.tol;
  rep.samples_requested = opt.points;
  rep.samples_used = static_cast<int>(samples.size());
  rep.per_sample = std::move(samples);
  const auto& s = rep.per_sample;
  for (const auto& x : s) {
    rep.tau2_direct_max = std::max(rep.tau2_direct_max, x.tau2_direct_norm);
    rep.tau2_direct_mean += x.tau2_direct_norm / s.size();
    rep.split_normal_max = std::max(rep.split_normal_max, x.split_normal_norm);
    rep.split_tangent_max = std::max(rep.split_tangent_max, x.split_tangent_norm);
    rep.split_gap_max = std::max(rep.split_gap_max, x.split_gap);
    rep.tau2_normalized_max = std::max(rep.tau2_normalized_max, x.tau2_direct_norm / x.normalizer);
    rep.split_normal_normalized_max = std::max(rep.split_normal_normalized_max, x.split_normal_norm / x.normalizer);
    rep.split_tangent_normalized_max =
        std::max(rep.split_tangent_normalized_max, x.split_tangent_norm / x.normalizer);
    if (x.hyper_i) {
      rep.hyper_i_max = std::max(rep.hyper_i_max.value_or(0.0), *x.hyper_i);
      rep.hyper_ii_max = std::max(rep.hyper_ii_max.value_or(0.0), *x.hyper_ii);
      // The hypersurface system determines the norm: tau2 = m (res_i, 2 res_ii).
      const double via_system = chart.m * std::hypot(*x.hyper_i, 2.0 * *x.hyper_ii);
      if (detail::residual_class(via_system, opt.tol) != detail::residual_class(x.tau2_direct_norm, opt.tol)) {
        rep.hypersurface_agrees = false;
      }
    }
  }
  rep.pmc = pmc_check(geos, opt.tol);
  rep.H_norm = detail::stat_of(s, [](const SampleResidual& x) { return x.H_norm; });
  rep.A_norm2 = detail::stat_of(s, [](const SampleResidual& x) { return x.A_norm2; });
  rep.B_norm2 = detail::stat_of(s, [](const SampleResidual& x) { return x.B_norm2; });
  rep.scalar_curvature = detail::stat_of(s, [](const SampleResidual& x) { return x.scalar_curvature; });
  if (chart.is_hypersurface()) {
    rep.f = detail::stat_of(s, [](const SampleResidual& x) { return x.f.value_or(0.0); });
  }
  rep.ah_slack_min = detail::stat_of(s, [](const SampleResidual& x) { return x.ah_slack; }).min;
  rep.minimal = rep.H_norm.max < opt.tol.pass_tol;
  rep.verdict = decide_verdict(rep.tau2_direct_max, rep.H_norm.max, rep.H_norm.min, opt.tol);
  rep.audit = quantity_audit(rep);
  return rep;
}

/// Evaluate every residual at `opt.points` deterministic samples. Samples
/// that fail (rank deficiency, ill-conditioning) are recorded and skipped;
/// if every sample fails the first error is rethrown.
inline ResidualReport evaluate_chart(const ChartSpec& chart, const EvalOptions& opt = {}) {
  const auto pts = sample_points(chart, opt.points, opt.seed);
  const int count = static_cast<int>(pts.size());
  std::vector<std::optional<PointGeometry>> geos(count);
  std::vector<std::optional<SampleResidual>> res(count);
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::string> messages(count);
  parallel_for(
      count,
      [&](int i) {
        try {
          geos[i] = compute_geometry(chart, pts[i]);
          res[i] = sample_residual(*geos[i], opt.tol.pass_tol);
        } catch (const Error& e) {
          errors[i] = std::current_exception();
          messages[i] = e.what();
        }
      },
      opt.threads);
  std::vector<SampleResidual> samples;
  std::vector<PointGeometry> good;
  std::vector<std::string> failures;
  for (int i = 0; i < count; ++i) {
    if (res[i]) {
      samples.push_back(std::move(*res[i]));
      good.push_back(std::move(*geos[i]));
    } else {
      failures.push_back(messages[i]);
    }
  }
  if (samples.empty()) std::rethrow_exception(errors.front());
  ResidualReport rep = aggregate(chart, std::move(samples), good, opt);
  rep.failures = std::move(failures);
  return rep;
}

}  // namespace bitension
