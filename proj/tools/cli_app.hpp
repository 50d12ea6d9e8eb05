#pragma once

// Command-line front end. Exit status: 0 biharmonic-proper, minimal or an
// informational command; 1 not-biharmonic or inconclusive; 2 bad input;
// 3 numerical failure at every sample.

#include <charconv>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bitension/bitension.hpp"

namespace bitension::cli {

enum ExitCode { kOk = 0, kNotBiharmonic = 1, kBadInput = 2, kNumerical = 3 };

struct RunConfig {
  std::string subcommand;
  std::string catalog_tag;
  std::string chart_file;
  std::vector<std::string> params;
  int points = 64;
  std::uint64_t seed = 42;
  double pass_tol = 1e-6;
  double fail_tol = 1e-3;
  std::string format = "human";
  std::string output;
  std::string range;
  int steps = 200;
};

inline double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("invalid number '" + text + "' for " + what, 1, static_cast<int>(ptr - text.data()) + 1);
  }
  return v;
}

struct ParamArgs {
  ParamMap values;
  std::optional<std::string> free;  // bare name, scan only
};

inline ParamArgs parse_params(const std::vector<std::string>& raw, bool allow_free) {
  ParamArgs out;
  for (const auto& p : raw) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) {
      if (!allow_free) throw ParseError("--param expects name=value, got '" + p + "'", 1, 1);
      if (out.free) throw ParseError("more than one free parameter ('" + *out.free + "', '" + p + "')", 1, 1);
      if (p.empty()) throw ParseError("empty parameter name", 1, 1);
      out.free = p;
      continue;
    }
    const std::string key = p.substr(0, eq);
    if (key.empty()) throw ParseError("empty parameter name in '" + p + "'", 1, 1);
    out.values[key] = parse_number(p.substr(eq + 1), "parameter '" + key + "'");
  }
  return out;
}

inline Interval parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ParseError("--range expects lo:hi, got '" + text + "'", 1, 1);
  Interval iv{parse_number(text.substr(0, colon), "range start"), parse_number(text.substr(colon + 1), "range end")};
  if (!(iv.lo < iv.hi)) throw ParseError("--range needs lo < hi", 1, static_cast<int>(colon) + 1);
  return iv;
}

inline ChartSpec resolve_chart(const RunConfig& cfg, const ParamMap& params) {
  if (!cfg.chart_file.empty()) {
    ChartSpec c = load_chart_file(cfg.chart_file);
    for (const auto& [k, v] : params) c = with_param(c, k, v);
    return c;
  }
  return catalog_chart(cfg.catalog_tag, params);
}

inline json config_echo(const RunConfig& cfg) {
  json src = cfg.chart_file.empty() ? json{{"catalog", cfg.catalog_tag}} : json{{"file", cfg.chart_file}};
  src["params"] = cfg.params;
  json echo = {{"subcommand", cfg.subcommand},
               {"chart_source", src},
               {"points", cfg.points},
               {"seed", cfg.seed},
               {"pass_tol", cfg.pass_tol},
               {"fail_tol", cfg.fail_tol},
               {"format", cfg.format}};
  if (cfg.subcommand == "scan") {
    echo["range"] = cfg.range;
    echo["steps"] = cfg.steps;
  }
  return echo;
}

inline void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty()) {
    out << text;
  } else {
    write_atomic(cfg.output, text);
  }
}

inline std::string catalog_text(bool as_json) {
  if (as_json) {
    json arr = json::array();
    for (const auto& e : catalog_entries()) {
      json params = json::object();
      for (const auto& [k, v] : e.params) params[k] = v;
      arr.push_back({{"tag", e.tag}, {"summary", e.summary}, {"params", params}});
    }
    return dump_json({{"tool_version", kToolVersion}, {"catalog", arr}});
  }
  std::ostringstream os;
  for (const auto& e : catalog_entries()) {
    os << e.tag << "\n  " << e.summary << '\n';
    for (const auto& [k, v] : e.params) os << "    " << k << ": " << v << '\n';
  }
  return os.str();
}

inline Tolerances tolerances(const RunConfig& cfg) {
  if (!(cfg.pass_tol > 0.0 && cfg.pass_tol < cfg.fail_tol)) {
    throw ParseError("tolerances must satisfy 0 < pass-tol < fail-tol", 1, 1);
  }
  return {cfg.pass_tol, cfg.fail_tol};
}

inline int verdict_exit(Verdict v) {
  return v == Verdict::BiharmonicProper || v == Verdict::Minimal ? kOk : kNotBiharmonic;
}

inline int run_verify(const RunConfig& cfg, std::ostream& out, bool audit_only) {
  EvalOptions opt;
  opt.points = cfg.points;
  opt.seed = cfg.seed;
  opt.tol = tolerances(cfg);
  const ParamArgs params = parse_params(cfg.params, false);
  const ChartSpec chart = resolve_chart(cfg, params.values);
  const ResidualReport rep = evaluate_chart(chart, opt);
  std::string text;
  if (audit_only) {
    if (cfg.format == "json") {
      const json full = report_json(rep, config_echo(cfg));
      text = dump_json({{"tool_version", full["tool_version"]},
                        {"config_echo", full["config_echo"]},
                        {"chart", full["chart"]},
                        {"quantities", full["quantities"]},
                        {"audit", full["audit"]},
                        {"verdict", full["verdict"]}});
    } else if (cfg.format == "csv") {
      std::ostringstream os;
      os << "name,measured,predicted,deviation,holds,note\n";
      for (const auto& a : rep.audit) {
        os << a.name << ',' << detail::shortest(a.measured) << ',' << detail::shortest(a.predicted) << ','
           << detail::shortest(a.deviation) << ',' << (a.holds ? "true" : "false") << ",\"" << a.note << "\"\n";
      }
      text = os.str();
    } else {
      text = "chart    " + chart.name + "\nverdict  " + to_string(rep.verdict) + "\n\naudit\n" + audit_text(rep.audit);
    }
  } else if (cfg.format == "json") {
    text = dump_json(report_json(rep, config_echo(cfg)));
  } else if (cfg.format == "csv") {
    text = report_csv(rep);
  } else {
    text = report_text(rep);
  }
  emit(cfg, text, out);
  if (audit_only) {
    if (rep.verdict != Verdict::BiharmonicProper) return kNotBiharmonic;
    for (const auto& a : rep.audit) {
      if (!a.holds) return kNotBiharmonic;
    }
    return kOk;
  }
  return verdict_exit(rep.verdict);
}

inline int run_scan(const RunConfig& cfg, std::ostream& out) {
  const ParamArgs params = parse_params(cfg.params, true);
  if (!params.free) throw ParseError("scan needs a free parameter: --param <name>", 1, 1);
  if (cfg.range.empty()) throw ParseError("scan needs --range lo:hi", 1, 1);
  FamilySpec fam;
  fam.base = resolve_chart(cfg, params.values);
  fam.param_name = *params.free;
  fam.range = parse_range(cfg.range);
  fam.steps = cfg.steps;
  fam.samples_per_point = cfg.points;
  fam.seed = cfg.seed;
  fam.tol = tolerances(cfg);
  const ScanResult res = sweep(fam);
  std::string text;
  if (cfg.format == "json") {
    text = dump_json(scan_json(res, config_echo(cfg)));
  } else if (cfg.format == "csv") {
    text = scan_csv(res);
  } else {
    text = scan_text(res);
  }
  emit(cfg, text, out);
  return kOk;
}

inline void add_chart_options(CLI::App* cmd, RunConfig& cfg, const char* catalog_flag) {
  auto* cat = cmd->add_option(catalog_flag, cfg.catalog_tag, "catalog entry tag");
  auto* file = cmd->add_option("--chart", cfg.chart_file, "chart document (JSON)");
  cat->excludes(file);
  file->excludes(cat);
  cmd->add_option("--param", cfg.params, "parameter override name=value (repeatable)")->allow_extra_args(false);
  cmd->add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
  cmd->add_option("--pass-tol", cfg.pass_tol, "pass threshold")->capture_default_str();
  cmd->add_option("--fail-tol", cfg.fail_tol, "fail threshold")->capture_default_str();
  cmd->add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"human", "json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--output,-o", cfg.output, "write the report to this path");
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Numerical verification of biharmonic immersions into unit spheres", "bitension"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  auto* catalog = app.add_subcommand("catalog", "catalog operations");
  bool list_json = false;
  auto* list = catalog->add_subcommand("list", "list built-in charts and their parameters");
  list->add_flag("--json", list_json, "print as JSON");
  catalog->require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "evaluate every residual on a chart");
  add_chart_options(verify, cfg, "--catalog");
  verify->add_option("--points", cfg.points, "number of sample points")->capture_default_str();

  auto* audit = app.add_subcommand("audit", "check predicted invariants of a biharmonic chart");
  add_chart_options(audit, cfg, "--catalog");
  audit->add_option("--points", cfg.points, "number of sample points")->capture_default_str();

  int scan_points = 16;
  auto* scan = app.add_subcommand("scan", "sweep a one-parameter family and locate its biharmonic members");
  add_chart_options(scan, cfg, "--family");
  scan->add_option("--range", cfg.range, "parameter range lo:hi")->required();
  scan->add_option("--steps", cfg.steps, "grid steps")->capture_default_str();
  scan->add_option("--points", scan_points, "samples per grid point")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (catalog->parsed()) {
      cfg.subcommand = "catalog";
      out << catalog_text(list_json);
      return kOk;
    }
    CLI::App* cmd = verify->parsed() ? verify : audit->parsed() ? audit : scan;
    cfg.subcommand = cmd->get_name();
    if (cmd == scan) cfg.points = scan_points;
    if (cfg.catalog_tag.empty() && cfg.chart_file.empty()) {
      const char* flag = cmd == scan ? "--family" : "--catalog";
      throw ParseError(std::string("a chart source is required: ") + flag + " <tag> or --chart <file>", 1, 1);
    }
    if (cmd == scan) return run_scan(cfg, out);
    return run_verify(cfg, out, cmd == audit);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const ChartError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const GeometryError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
}

}  // namespace bitension::cli
