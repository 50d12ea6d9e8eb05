#pragma once

// JSON, CSV and plain-text renderings of residual reports and scans.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "bitension/biharmonic.hpp"
#include "bitension/chart.hpp"
#include "bitension/scan.hpp"

#ifndef BITENSION_VERSION
#define BITENSION_VERSION "0.1.0"
#endif

namespace bitension {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = BITENSION_VERSION;

namespace detail {

// Non-finite values serialize as null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json opt_num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

inline json stat_json(const Stat& s) { return {{"min", num(s.min)}, {"max", num(s.max)}, {"mean", num(s.mean)}}; }

inline std::string shortest(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline json audit_json(const std::vector<AuditEntry>& audit) {
  json out = json::array();
  for (const auto& a : audit) {
    out.push_back({{"name", a.name},
                   {"measured", detail::num(a.measured)},
                   {"predicted", detail::num(a.predicted)},
                   {"deviation", detail::num(a.deviation)},
                   {"holds", a.holds},
                   {"note", a.note}});
  }
  return out;
}

/// Full report document. `config_echo` is copied verbatim.
inline json report_json(const ResidualReport& r, const json& config_echo = json::object()) {
  using detail::num;
  using detail::opt_num;
  json per = json::array();
  for (const auto& s : r.per_sample) {
    per.push_back({{"point", s.point},
                   {"tau2_direct_norm", num(s.tau2_direct_norm)},
                   {"split_normal_norm", num(s.split_normal_norm)},
                   {"split_tangent_norm", num(s.split_tangent_norm)},
                   {"split_gap", num(s.split_gap)},
                   {"hyper_i_residual", opt_num(s.hyper_i)},
                   {"hyper_ii_residual", opt_num(s.hyper_ii)},
                   {"pmc_parallel_norm", num(s.pmc.parallel_norm)},
                   {"pmc_trace_identity", num(s.pmc.trace_identity)},
                   {"pmc_frame_cross", opt_num(s.pmc.frame_cross)},
                   {"pmc_frame_norm", opt_num(s.pmc.frame_norm)},
                   {"H_norm", num(s.H_norm)},
                   {"A_norm2", num(s.A_norm2)},
                   {"B_norm2", num(s.B_norm2)},
                   {"scalar_curvature", num(s.scalar_curvature)},
                   {"f", opt_num(s.f)}});
  }
  json residuals = {
      {"thresholds", {{"pass_tol", num(r.tol.pass_tol)}, {"fail_tol", num(r.tol.fail_tol)}}},
      {"tau2_direct_norm",
       {{"max", num(r.tau2_direct_max)}, {"mean", num(r.tau2_direct_mean)}, {"normalized_max", num(r.tau2_normalized_max)}}},
      {"split_normal_norm", {{"max", num(r.split_normal_max)}, {"normalized_max", num(r.split_normal_normalized_max)}}},
      {"split_tangent_norm",
       {{"max", num(r.split_tangent_max)}, {"normalized_max", num(r.split_tangent_normalized_max)}}},
      {"split_gap_max", num(r.split_gap_max)},
      {"hyper_i_residual", {{"max", opt_num(r.hyper_i_max)}}},
      {"hyper_ii_residual", {{"max", opt_num(r.hyper_ii_max)}}},
      {"hypersurface_agreement", r.hypersurface_agrees},
      {"pmc",
       {{"pmc_parallel_norm", num(r.pmc.parallel_norm)},
        {"pmc_trace_identity", num(r.pmc.trace_identity)},
        {"pmc_frame_cross", opt_num(r.pmc.frame_cross)},
        {"pmc_frame_norm", opt_num(r.pmc.frame_norm)},
        {"applicable", r.pmc.applicable},
        {"trace_holds", r.pmc.trace_holds},
        {"frame_holds", r.pmc.frame_holds},
        {"equivalent", r.pmc.equivalent},
        {"zero_H_samples", r.pmc.zero_H_samples}}},
      {"per_sample", per}};
  json quantities = {{"H_norm", detail::stat_json(r.H_norm)},
                     {"A_norm2", detail::stat_json(r.A_norm2)},
                     {"B_norm2", detail::stat_json(r.B_norm2)},
                     {"scalar_curvature", detail::stat_json(r.scalar_curvature)},
                     {"f", r.f ? detail::stat_json(*r.f) : json(nullptr)},
                     {"ah_bound_slack_min", num(r.ah_slack_min)},
                     {"minimal", r.minimal}};
  json failures = r.failures;
  return {{"tool_version", kToolVersion},
          {"config_echo", config_echo},
          {"chart", chart_to_json(r.chart)},
          {"samples",
           {{"requested", r.samples_requested},
            {"used", r.samples_used},
            {"seed", r.seed},
            {"failures", failures}}},
          {"residuals", residuals},
          {"quantities", quantities},
          {"audit", audit_json(r.audit)},
          {"verdict", to_string(r.verdict)}};
}

inline json scan_json(const ScanResult& s, const json& config_echo = json::object()) {
  using detail::num;
  const FamilySpec& f = s.family;
  json grid = json::array();
  for (const auto& g : s.grid) {
    grid.push_back({{"param", num(g.param)},
                    {"max_residual", num(g.max_residual)},
                    {"mean_residual", num(g.mean_residual)},
                    {"H_norm", num(g.H_norm)},
                    {"verdict", g.error ? "flagged" : to_string(g.verdict)},
                    {"error", g.error ? json(*g.error) : json(nullptr)}});
  }
  json roots = json::array();
  for (const auto& r : s.roots) {
    roots.push_back({{"param", num(r.param)},
                     {"residual", num(r.residual)},
                     {"H_norm", num(r.H_norm)},
                     {"B_norm2", num(r.B_norm2)},
                     {"classification", to_string(r.classification)},
                     {"verdict", to_string(r.verdict)},
                     {"bisection_iterations", r.iterations}});
  }
  json boundary = json::array();
  for (const auto& b : s.boundary) {
    boundary.push_back(
        {{"param", num(b.param)}, {"residual", num(b.residual)}, {"H_norm", num(b.H_norm)}, {"label", b.label}});
  }
  return {{"tool_version", kToolVersion},
          {"config_echo", config_echo},
          {"family",
           {{"chart", chart_to_json(f.base)},
            {"param", f.param_name},
            {"range", {num(f.range.lo), num(f.range.hi)}},
            {"steps", f.steps},
            {"samples_per_point", f.samples_per_point},
            {"verify_points", f.verify_points},
            {"seed", f.seed},
            {"thresholds", {{"pass_tol", num(f.tol.pass_tol)}, {"fail_tol", num(f.tol.fail_tol)}}}}},
          {"grid", grid},
          {"roots", roots},
          {"boundary", boundary}};
}

/// Canonical text form: two-space indent, trailing newline.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

/// Columns param, max_residual, mean_residual, H_norm, verdict. Root rows
/// carry verdict "root:<classification>" and boundary rows
/// "boundary:<label>"; both leave mean_residual empty.
inline std::string scan_csv(const ScanResult& s) {
  using detail::shortest;
  std::ostringstream os;
  os << "param,max_residual,mean_residual,H_norm,verdict\n";
  for (const auto& g : s.grid) {
    os << shortest(g.param) << ',' << shortest(g.max_residual) << ',' << shortest(g.mean_residual) << ','
       << shortest(g.H_norm) << ',' << (g.error ? "flagged" : to_string(g.verdict)) << '\n';
  }
  for (const auto& r : s.roots) {
    os << shortest(r.param) << ',' << shortest(r.residual) << ",," << shortest(r.H_norm) << ",root:"
       << to_string(r.classification) << '\n';
  }
  for (const auto& b : s.boundary) {
    os << shortest(b.param) << ',' << shortest(b.residual) << ",," << shortest(b.H_norm) << ",boundary:" << b.label
       << '\n';
  }
  return os.str();
}

/// Per-sample table for a single chart.
inline std::string report_csv(const ResidualReport& r) {
  using detail::shortest;
  std::ostringstream os;
  os << "sample,tau2_direct_norm,split_normal_norm,split_tangent_norm,H_norm,A_norm2,B_norm2,scalar_curvature,"
        "verdict\n";
  for (std::size_t i = 0; i < r.per_sample.size(); ++i) {
    const auto& s = r.per_sample[i];
    os << i << ',' << shortest(s.tau2_direct_norm) << ',' << shortest(s.split_normal_norm) << ','
       << shortest(s.split_tangent_norm) << ',' << shortest(s.H_norm) << ',' << shortest(s.A_norm2) << ','
       << shortest(s.B_norm2) << ',' << shortest(s.scalar_curvature) << ',' << to_string(r.verdict) << '\n';
  }
  return os.str();
}

namespace detail {

inline std::string fixed(double v, int prec = 10) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

inline std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

}  // namespace detail

inline std::string audit_text(const std::vector<AuditEntry>& audit) {
  std::ostringstream os;
  if (audit.empty()) {
    os << "  (no audit: verdict is not biharmonic-proper)\n";
    return os.str();
  }
  os << "  " << std::left << std::setw(22) << "check" << std::setw(16) << "measured" << std::setw(16) << "predicted"
     << std::setw(12) << "deviation" << "holds  note\n";
  for (const auto& a : audit) {
    os << "  " << std::left << std::setw(22) << a.name << std::setw(16) << detail::fixed(a.measured) << std::setw(16)
       << detail::fixed(a.predicted) << std::setw(12) << detail::sci(a.deviation) << std::setw(7)
       << (a.holds ? "yes" : "NO") << a.note << '\n';
  }
  return os.str();
}

inline std::string report_text(const ResidualReport& r) {
  using detail::fixed;
  using detail::sci;
  std::ostringstream os;
  os << "chart    " << r.chart.name << "  (m = " << r.chart.m << ", n = " << r.chart.n << ")\n";
  if (!r.chart.params.empty()) {
    os << "params  ";
    for (const auto& [k, v] : r.chart.params) os << ' ' << k << '=' << fixed(v, 12);
    os << '\n';
  }
  os << "samples  " << r.samples_used << " of " << r.samples_requested << " (seed " << r.seed << ")\n\n";
  os << "quantities            min             max             mean\n";
  auto row = [&](const char* name, const Stat& s) {
    os << "  " << std::left << std::setw(20) << name << std::setw(16) << fixed(s.min) << std::setw(16) << fixed(s.max)
       << fixed(s.mean) << '\n';
  };
  row("|H|", r.H_norm);
  row("|A|^2", r.A_norm2);
  row("|B|^2", r.B_norm2);
  row("s", r.scalar_curvature);
  if (r.f) row("f", *r.f);
  os << "\nresiduals (max over samples)\n";
  auto res = [&](const char* name, double v) { os << "  " << std::left << std::setw(42) << name << sci(v) << '\n'; };
  res("|tau2|", r.tau2_direct_max);
  res("|tau2| / m(1 + |H|^2)", r.tau2_normalized_max);
  res("split normal", r.split_normal_max);
  res("split tangent", r.split_tangent_max);
  res("split vs direct gap", r.split_gap_max);
  if (r.hyper_i_max) {
    res("hypersurface |Df - (m - |A|^2) f|", *r.hyper_i_max);
    res("hypersurface |A grad f + m f grad f/2|", *r.hyper_ii_max);
  }
  res("|nabla^perp H|", r.pmc.parallel_norm);
  if (r.pmc.applicable) {
    res("PMC trace B(A_H, .) - m H", r.pmc.trace_identity);
    if (r.pmc.frame_cross) {
      res("PMC <A_H, A_xi>, xi perp H", *r.pmc.frame_cross);
      res("PMC |A_H|^2 - m |H|^2", *r.pmc.frame_norm);
    }
  }
  os << "\naudit\n" << audit_text(r.audit);
  if (!r.failures.empty()) {
    os << "\nskipped samples\n";
    for (const auto& f : r.failures) os << "  " << f << '\n';
  }
  os << "\nverdict  " << to_string(r.verdict) << "  (pass_tol " << sci(r.tol.pass_tol) << ", fail_tol "
     << sci(r.tol.fail_tol) << ")\n";
  return os.str();
}

inline std::string scan_text(const ScanResult& s) {
  std::ostringstream os;
  os << "family   " << s.family.base.name << ", free parameter " << s.family.param_name << " in ["
     << detail::fixed(s.family.range.lo) << ", " << detail::fixed(s.family.range.hi) << "], " << s.family.steps
     << " steps, " << s.family.samples_per_point << " samples per point\n";
  int flagged = 0;
  for (const auto& g : s.grid) flagged += g.error ? 1 : 0;
  if (flagged) os << "flagged  " << flagged << " grid points failed chart checks\n";
  os << "roots\n";
  if (s.roots.empty()) os << "  none\n";
  for (const auto& r : s.roots) {
    os << "  " << s.family.param_name << " = " << detail::fixed(r.param) << "  " << to_string(r.classification)
       << "  |tau2| " << detail::sci(r.residual) << "  |H| " << detail::fixed(r.H_norm) << "  |B|^2 "
       << detail::fixed(r.B_norm2) << "  (" << r.iterations << " iterations)\n";
  }
  if (!s.boundary.empty()) {
    os << "boundary\n";
    for (const auto& b : s.boundary) {
      os << "  " << s.family.param_name << " = " << detail::fixed(b.param) << "  " << b.label << "  |tau2| "
         << detail::sci(b.residual) << "  |H| " << detail::fixed(b.H_norm) << '\n';
    }
  }
  return os.str();
}

/// Write `content` to `path` through a temporary file and rename.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move report into '" + path + "'");
  }
}

}  // namespace bitension
