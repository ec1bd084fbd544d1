#pragma once

// Command-line front end: one subcommand per bound, curves written as CSV.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tosc/tosc.hpp"

namespace tosc::cli {

struct LambdaSpec {
  double min = 0.01;
  double max = 1000.0;
  int points = 80;
  std::string scale = "log";

  std::vector<double> grid() const { return lambda_grid(min, max, points, scale == "log"); }
};

struct RunConfig {
  std::string subcommand;

  // inputs
  std::optional<std::filesystem::path> confusion, prior_file, logits, source, distortion;
  io::PriorChoice prior_choice = io::PriorChoice::kAuto;
  std::optional<std::filesystem::path> out;

  LambdaSpec lambda;
  std::vector<std::string> methods;
  std::optional<long> pixels;
  std::uint64_t seed = 1;
  double tol = 1e-10;
  int max_iters = 10000;

  // closed-form
  std::string kind;
  double q = 0.5;
  int classes = 10;
  std::optional<double> d;
  std::optional<int> k;  // merge: single k instead of the full sweep

  // gmm
  double grid_half_width = 6.0;
  int grid_bins = 1201;
  double noise_variance = 1.0;
  int ce_points = 24;
  int ce_max_iters = kCeMaxIterations;

  // synth
  std::size_t samples = 10000;
  double concentration = 20.0;
  double base_concentration = 1.0;
  double logit_scale = 1.0;

  BAConfig ba_config() const {
    BAConfig c;
    c.convergence_tol = tol;
    c.max_iterations = max_iters;
    return c;
  }
};

namespace detail {

inline std::vector<std::string> split_methods(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline void check_methods(const std::vector<std::string>& methods,
                          const std::set<std::string>& allowed, const std::string& cmd) {
  if (methods.empty()) throw ValidationError(cmd + ": --methods selects nothing");
  for (const auto& m : methods)
    if (!allowed.count(m)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ",") + a;
      throw ValidationError(cmd + ": unknown method '" + m + "' (choose from " + list + ")");
    }
}

inline bool wants(const RunConfig& c, const std::string& m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

inline void emit(const RunConfig& c, const std::string& content, std::ostream& out) {
  if (c.out)
    io::write_file_atomic(*c.out, content);
  else
    out << content;
}

inline void emit_curves(const RunConfig& c, const std::vector<RDCurve>& curves, std::ostream& out) {
  emit(c, io::format_curves_csv(curves, c.pixels), out);
}

inline void run_closed_form(const RunConfig& c, std::ostream& out) {
  if (!c.d) throw ValidationError("closed-form: --d is required");
  std::string content = "kind,parameter,distortion,rate_bits";
  if (c.pixels) content += ",bpp";
  content += '\n';
  double rate = 0.0;
  std::string parameter;
  if (c.kind == "binary") {
    rate = rd_binary(c.q, *c.d);
    parameter = io::detail::format_number(c.q);
  } else {
    if (c.classes < 2) throw DomainError("closed-form: --classes must be >= 2");
    rate = rd_uniform_classes(static_cast<std::size_t>(c.classes), *c.d);
    parameter = std::to_string(c.classes);
  }
  content += c.kind + ',' + parameter + ',' + io::detail::format_number(*c.d) + ',' +
             io::detail::format_number(rate);
  if (c.pixels) content += ',' + io::detail::format_number(io::bits_per_pixel(rate, *c.pixels));
  content += '\n';
  emit(c, content, out);
}

inline void run_ba(const RunConfig& c, std::ostream& out) {
  if (!c.source || !c.distortion) throw ValidationError("ba: --source and --distortion are required");
  const Pmf source = io::read_pmf_csv(*c.source);
  const DistortionMatrix d = io::read_distortion_csv(*c.distortion);
  const auto grid = c.lambda.grid();
  emit_curves(c, {ba_sweep(source, d, grid, c.ba_config(), "ba")}, out);
}

inline ConfusionMatrix load_confusion(const RunConfig& c) {
  if (!c.confusion) throw ValidationError("class-bounds: --confusion is required");
  io::ConfusionReadOptions opts;
  opts.prior_path = c.prior_file;
  opts.prior = c.prior_choice;
  return io::read_confusion_csv(*c.confusion, opts);
}

inline void run_class_bounds(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_methods(c.methods, {"ord", "ec", "iec", "ts", "merge"}, "class-bounds");
  const ConfusionMatrix cm = load_confusion(c);
  const TaskModelStats s = stats(cm);
  for (const auto& w : s.warnings) err << "warning: " << w << '\n';
  const auto grid = c.lambda.grid();
  const BAConfig cfg = c.ba_config();

  std::vector<RDCurve> curves;
  if (wants(c, "ord")) {
    const auto dg = oracle_distortion_grid(cm.prior(), c.lambda.points);
    curves.push_back(ord_curve(cm.prior(), dg, cfg));
  }
  if (wants(c, "ec")) curves.push_back(ec_curve(cm, grid, cfg));
  if (wants(c, "iec")) curves.push_back(iec_curve(cm, grid, cfg));
  if (wants(c, "ts")) curves.push_back(ts_curve(s, 11));
  if (wants(c, "merge")) {
    if (c.k) {
      if (*c.k < 0) throw ValidationError("class-bounds: --k must be nonnegative");
      const MergePoint m = merge_k_baseline(cm, static_cast<std::size_t>(*c.k));
      curves.push_back({"merge", {{kNoLambda, m.rate, m.distortion, "k=" + std::to_string(m.k)}}});
    } else {
      curves.push_back(merge_curve(cm));
    }
  }
  emit_curves(c, curves, out);
}

inline void run_gmm(const RunConfig& c, std::ostream& out) {
  check_methods(c.methods, {"ord", "ird", "ec", "ce"}, "gmm");
  GmmSpec spec;
  spec.q = c.q;
  spec.half_width = c.grid_half_width;
  spec.bins = c.grid_bins;
  spec.noise_variance = c.noise_variance;
  const DiscretizedGmm g = discretize(spec);
  const auto grid = c.lambda.grid();
  const BAConfig cfg = c.ba_config();

  std::vector<RDCurve> curves;
  if (wants(c, "ord"))
    curves.push_back(gmm_ord_curve(g, gmm_oracle_distortion_grid(g, c.lambda.points)));
  if (wants(c, "ird")) curves.push_back(gmm_ird_curve(g, grid, cfg));
  if (wants(c, "ec")) curves.push_back(gmm_ec_curve(g, grid, cfg));
  if (wants(c, "ce")) {
    BAConfig ce_cfg = cfg;
    ce_cfg.max_iterations = c.ce_max_iters;
    const auto ce_grid = lambda_grid(c.lambda.min, c.lambda.max, c.ce_points, c.lambda.scale == "log");
    curves.push_back(gmm_ce_curve(g, ce_grid, ce_cfg));
  }
  emit_curves(c, curves, out);
}

inline void run_snc(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_methods(c.methods, {"snc", "ec", "iec"}, "snc");
  if (!c.logits) throw ValidationError("snc: --logits is required");
  const LogitsDataset ds = io::read_logits_csv(*c.logits);
  const auto grid = c.lambda.grid();
  std::vector<RDCurve> curves;
  if (wants(c, "snc")) curves.push_back(snc_sweep(ds, grid));
  if (wants(c, "ec") || wants(c, "iec")) {
    const ConfusionMatrix cm = argmax_confusion(ds);
    for (const auto& w : stats(cm).warnings) err << "warning: " << w << '\n';
    if (wants(c, "ec")) curves.push_back(ec_curve(cm, grid, c.ba_config()));
    if (wants(c, "iec")) curves.push_back(iec_curve(cm, grid, c.ba_config()));
  }
  emit_curves(c, curves, out);
}

inline void run_synth(const RunConfig& c, std::ostream& out) {
  SynthParams p;
  p.kind = c.kind == "dirichlet" ? SynthKind::kDirichlet : SynthKind::kGmm;
  p.samples = c.samples;
  p.seed = c.seed;
  p.q = c.q;
  p.noise_variance = c.noise_variance;
  p.logit_scale = c.logit_scale;
  if (c.classes < 2) throw ValidationError("synth: --classes must be >= 2");
  p.classes = static_cast<std::size_t>(c.classes);
  p.concentration = c.concentration;
  p.base_concentration = c.base_concentration;
  emit(c, io::format_logits_csv(synth_logits(p)), out);
}

}  // namespace detail

/// Dispatches a validated configuration. Returns the process exit status.
inline int run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    if (c.subcommand == "closed-form")
      detail::run_closed_form(c, out);
    else if (c.subcommand == "ba")
      detail::run_ba(c, out);
    else if (c.subcommand == "class-bounds")
      detail::run_class_bounds(c, out, err);
    else if (c.subcommand == "gmm")
      detail::run_gmm(c, out);
    else if (c.subcommand == "snc")
      detail::run_snc(c, out, err);
    else if (c.subcommand == "synth")
      detail::run_synth(c, out);
    else
      throw ValidationError("unknown subcommand '" + c.subcommand + "'");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

namespace detail {

inline void add_lambda_options(CLI::App* cmd, LambdaSpec& spec) {
  cmd->add_option("--lambda-min", spec.min, "Smallest Lagrange multiplier (nats per distortion unit)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lambda-max", spec.max, "Largest Lagrange multiplier (nats per distortion unit)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lambda-points", spec.points, "Number of multipliers in the sweep (count)")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  cmd->add_option("--lambda-scale", spec.scale, "Spacing of the multiplier grid")
      ->check(CLI::IsMember({"log", "linear"}))
      ->capture_default_str();
}

inline void add_solver_options(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--tol", c.tol, "BA stopping threshold on the output-marginal sup-norm change (probability)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iters", c.max_iters, "BA iteration cap per multiplier (count)")
      ->check(CLI::Range(1, 100000000))
      ->capture_default_str();
}

inline void add_output_options(CLI::App* cmd, RunConfig& c, bool with_pixels = true) {
  cmd->add_option("--out", c.out, "Output CSV path (stdout when omitted)");
  if (with_pixels)
    cmd->add_option("--pixels", c.pixels,
                    "Pixels per observation, H x W (count); adds bits-per-pixel = rate_bits / pixels")
        ->check(CLI::Range(1L, 1L << 40));
}

}  // namespace detail

/// Parses argv into `cfg`. Returns nullopt on success, else the exit status
/// to return (help output or a usage error already printed).
inline std::optional<int> parse(int argc, const char* const* argv, RunConfig& cfg,
                                std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Model-aware rate-distortion bounds for task-oriented source coding"};
  app.name("tosc-bounds");
  app.require_subcommand(1);

  LambdaSpec ba_l{0.01, 20.0, 40, "log"};
  LambdaSpec cb_l{1e-3, 1000.0, 90, "log"};
  LambdaSpec gmm_l{0.1, 1000.0, 120, "log"};
  LambdaSpec snc_l{1e-3, 1e3, 60, "log"};
  std::string cb_methods = "ord,ec,iec,ts,merge", gmm_methods = "ord,ird,ec,ce", snc_methods = "snc";
  std::string prior_arg;
  std::string cf_kind = "uniform", synth_kind = "gmm";
  std::vector<std::string> names;

  auto* cf = app.add_subcommand("closed-form", "Closed-form Hamming rate-distortion values");
  cf->add_option("--kind", cf_kind, "binary (Bernoulli source) or uniform (k equiprobable classes)")
      ->check(CLI::IsMember({"binary", "uniform"}))
      ->capture_default_str();
  cf->add_option("--q", cfg.q, "Bernoulli parameter P(Y = 1) for --kind binary (probability)")
      ->capture_default_str();
  cf->add_option("--classes", cfg.classes, "Class count for --kind uniform (count)")->capture_default_str();
  cf->add_option("--d", cfg.d, "Target distortion (probability of error)")->required();
  detail::add_output_options(cf, cfg);

  auto* ba = app.add_subcommand("ba", "Blahut-Arimoto sweep for a pmf and a distortion table");
  ba->add_option("--source", cfg.source, "Source pmf CSV (one value per line or one row)")->required();
  ba->add_option("--distortion", cfg.distortion, "Distortion CSV, rows = source symbols (cost units)")
      ->required();
  detail::add_lambda_options(ba, ba_l);
  detail::add_solver_options(ba, cfg);
  detail::add_output_options(ba, cfg);

  auto* cb = app.add_subcommand("class-bounds", "Bounds from a classifier confusion matrix");
  cb->add_option("--confusion", cfg.confusion, "Confusion CSV, rows = true class, counts or probabilities")
      ->required();
  cb->add_option("--prior", prior_arg,
                 "Class prior: a pmf CSV path, 'uniform', or 'rows' (row-count proportions)");
  cb->add_option("--methods", cb_methods, "Comma list from ord,ec,iec,ts,merge")->capture_default_str();
  cb->add_option("--k", cfg.k, "merge: emit only this k, the number of merged classes (count; default sweeps 0..K-1)");
  detail::add_lambda_options(cb, cb_l);
  detail::add_solver_options(cb, cfg);
  detail::add_output_options(cb, cfg);

  auto* gm = app.add_subcommand("gmm", "Curves of the binary Gaussian-mixture example");
  gm->add_option("--q", cfg.q, "P(Y = 1) (probability)")->capture_default_str();
  gm->add_option("--grid-half-width", cfg.grid_half_width, "Grid covers [-L, L] (units of X)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gm->add_option("--grid-bins", cfg.grid_bins, "Number of grid cells, odd (count)")->capture_default_str();
  gm->add_option("--noise-variance", cfg.noise_variance, "Variance of the additive Gaussian noise (units of X squared)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gm->add_option("--methods", gmm_methods, "Comma list from ord,ird,ec,ce")->capture_default_str();
  gm->add_option("--ce-points", cfg.ce_points, "Multipliers in the C&E sweep (count)")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  gm->add_option("--ce-max-iters", cfg.ce_max_iters, "BA iteration cap per C&E multiplier (count)")
      ->check(CLI::Range(1, 100000000))
      ->capture_default_str();
  detail::add_lambda_options(gm, gmm_l);
  detail::add_solver_options(gm, cfg);
  detail::add_output_options(gm, cfg);

  auto* sc = app.add_subcommand("snc", "Sample-and-communicate curve from a logits CSV");
  sc->add_option("--logits", cfg.logits, "Logits CSV with header label,l0,...,l{K-1}")->required();
  sc->add_option("--methods", snc_methods, "Comma list from snc,ec,iec (ec/iec use the argmax confusion)")
      ->capture_default_str();
  detail::add_lambda_options(sc, snc_l);
  detail::add_solver_options(sc, cfg);
  detail::add_output_options(sc, cfg);

  auto* sy = app.add_subcommand("synth", "Write a synthetic logits CSV");
  sy->add_option("--kind", synth_kind, "gmm (binary Gaussian mixture) or dirichlet (K-class posteriors)")
      ->check(CLI::IsMember({"gmm", "dirichlet"}))
      ->capture_default_str();
  sy->add_option("--samples", cfg.samples, "Number of records (count)")->check(CLI::Range(2, 1 << 30))->capture_default_str();
  sy->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  sy->add_option("--q", cfg.q, "gmm: P(Y = 1) (probability)")->capture_default_str();
  sy->add_option("--noise-variance", cfg.noise_variance, "gmm: noise variance (units of X squared)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sy->add_option("--logit-scale", cfg.logit_scale, "gmm: multiplier on log-posteriors (unitless)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sy->add_option("--classes", cfg.classes, "dirichlet: class count (count)")->capture_default_str();
  sy->add_option("--concentration", cfg.concentration, "dirichlet: extra concentration on the true class (unitless, inf = one-hot)")
      ->capture_default_str();
  sy->add_option("--base-concentration", cfg.base_concentration, "dirichlet: concentration on every class (unitless)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sy->add_option("--out", cfg.out, "Output CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (*cf) {
    cfg.subcommand = "closed-form";
    cfg.kind = cf_kind;
  } else if (*ba) {
    cfg.subcommand = "ba";
    cfg.lambda = ba_l;
  } else if (*cb) {
    cfg.subcommand = "class-bounds";
    cfg.lambda = cb_l;
    cfg.methods = detail::split_methods(cb_methods);
    if (prior_arg == "uniform")
      cfg.prior_choice = io::PriorChoice::kUniform;
    else if (prior_arg == "rows")
      cfg.prior_choice = io::PriorChoice::kRowMass;
    else if (!prior_arg.empty())
      cfg.prior_file = prior_arg;
  } else if (*gm) {
    cfg.subcommand = "gmm";
    cfg.lambda = gmm_l;
    cfg.methods = detail::split_methods(gmm_methods);
  } else if (*sc) {
    cfg.subcommand = "snc";
    cfg.lambda = snc_l;
    cfg.methods = detail::split_methods(snc_methods);
  } else if (*sy) {
    cfg.subcommand = "synth";
    cfg.kind = synth_kind;
  }
  if (cfg.lambda.points > 1 && !(cfg.lambda.min < cfg.lambda.max)) {
    err << "error: --lambda-min must be smaller than --lambda-max\n";
    return 2;
  }
  return std::nullopt;
}

inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  RunConfig cfg;
  if (auto status = parse(argc, argv, cfg, out, err)) return *status;
  return run(cfg, out, err);
}

}  // namespace tosc::cli
