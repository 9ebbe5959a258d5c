// ibpcli: config-driven front end over the ibp headers. One command per
// process; every run writes a manifest with the fully-resolved config so any
// artifact can be reproduced byte-for-byte. All computation is serial, so
// --threads never changes output bytes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ibp/serialize.hpp"

namespace fs = std::filesystem;
using namespace ibp;

namespace {

struct Ctx {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string threads = "auto";
  std::string format = "csv";
  json cfg = json::object();
};

void add_common(CLI::App* cmd, Ctx& ctx) {
  cmd->add_option("--config", ctx.config_path, "JSON config file");
  cmd->add_option("--out", ctx.out_dir, "output directory");
  cmd->add_option("--seed", ctx.seed, "master RNG seed")
      ->each([&ctx](const std::string&) { ctx.seed_set = true; });
  cmd->add_option("--threads", ctx.threads, "thread count or 'auto' (advisory)");
  cmd->add_option("--format", ctx.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
}

void load_config(Ctx& ctx) {
  if (ctx.config_path.empty()) return;
  std::ifstream in(ctx.config_path);
  if (!in) throw ConfigError("cannot open config file: " + ctx.config_path);
  try {
    ctx.cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!ctx.cfg.is_object()) throw ConfigError("config must be a JSON object");
  // the threads flag is execution advice, not configuration
  if (ctx.threads != "auto") {
    int n = 0;
    try {
      n = std::stoi(ctx.threads);
    } catch (...) {
      throw ConfigError("--threads must be a positive integer or 'auto'");
    }
    if (n < 1) throw ConfigError("--threads must be a positive integer or 'auto'");
  }
}

fs::path out_file(const Ctx& ctx, const std::string& name) {
  fs::create_directories(ctx.out_dir);
  return fs::path(ctx.out_dir) / name;
}

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << body;
}

void write_manifest(const Ctx& ctx, const std::string& command,
                    const json& resolved) {
  json m = {{"command", command}, {"format", ctx.format}, {"config", resolved}};
  if (ctx.seed_set) m["seed"] = ctx.seed;
  write_text(out_file(ctx, "manifest.json"), m.dump(2) + "\n");
}

json require_obj(const json& cfg, const char* key) {
  if (!cfg.contains(key))
    throw ConfigError(std::string("config: missing key '") + key + "'");
  return cfg.at(key);
}

std::vector<double> grid_from(const json& j, const std::string& where) {
  require_keys(j, {"lo", "hi", "step"}, where);
  return make_grid(get_required<double>(j, "lo", where),
                   get_required<double>(j, "hi", where),
                   get_required<double>(j, "step", where));
}

std::vector<double> grid_or(const json& cfg, const char* key, double lo, double hi,
                            double step, json& resolved) {
  json j = cfg.contains(key)
               ? cfg.at(key)
               : json{{"lo", lo}, {"hi", hi}, {"step", step}};
  resolved[key] = j;
  return grid_from(j, key);
}

// ---------------------------------------------------------------------------
// commands

int cmd_measure_eval(Ctx& ctx) {
  require_keys(ctx.cfg, {"measure", "cylinder"}, "config");
  WeightSequence seq = weight_sequence_from_json(require_obj(ctx.cfg, "measure"));
  auto bits = get_required<std::string>(ctx.cfg, "cylinder", "config");
  Cylinder c = Cylinder::from_string(bits);
  double lm = cylinder_measure(seq, c);
  json resolved = {{"measure", weight_sequence_to_json(seq)}, {"cylinder", bits}};
  write_manifest(ctx, "measure eval", resolved);
  json out = {{"cylinder", bits},
              {"depth", c.depth()},
              {"log2_measure", lm},
              {"measure", std::exp2(lm)}};
  write_text(out_file(ctx, "measure_eval.json"), out.dump(2) + "\n");
  std::cout << out.dump() << "\n";
  return 0;
}

TauGrid spectrum_from_config(const json& cfg, json& resolved) {
  WeightSequence seq = weight_sequence_from_json(require_obj(cfg, "measure"));
  resolved["measure"] = weight_sequence_to_json(seq);
  auto qs = grid_or(cfg, "q", -5.0, 5.0, 0.01, resolved);
  std::uint64_t N = cfg.value("horizon", std::uint64_t(1000));
  std::uint64_t wlo = cfg.value("window_lo", std::uint64_t(0));
  if (wlo == 0) wlo = std::max<std::uint64_t>(1, N / 2);
  resolved["horizon"] = N;
  resolved["window_lo"] = wlo;
  return tau_grid_running_sup(seq, qs, N, wlo);
}

int cmd_spectrum(Ctx& ctx) {
  require_keys(ctx.cfg, {"measure", "q", "horizon", "window_lo"}, "config");
  json resolved;
  TauGrid g = spectrum_from_config(ctx.cfg, resolved);
  write_manifest(ctx, "spectrum", resolved);
  std::ostringstream os;
  write_tau_csv(os, g);
  write_text(out_file(ctx, "spectrum.csv"), os.str());
  return 0;
}

int cmd_legendre(Ctx& ctx) {
  require_keys(ctx.cfg, {"measure", "q", "alpha", "horizon", "window_lo"}, "config");
  json resolved;
  TauGrid g = spectrum_from_config(ctx.cfg, resolved);
  auto alphas = grid_or(ctx.cfg, "alpha", 0.0, 3.0, 0.01, resolved);
  write_manifest(ctx, "legendre", resolved);
  LegendreGrid lg = legendre_transform(g, alphas);
  std::ostringstream os;
  write_legendre_csv(os, lg);
  write_text(out_file(ctx, "legendre.csv"), os.str());
  return 0;
}

int cmd_gibbs(Ctx& ctx) {
  require_keys(ctx.cfg, {"measure", "q"}, "config");
  WeightSequence seq = weight_sequence_from_json(require_obj(ctx.cfg, "measure"));
  double q = get_required<double>(ctx.cfg, "q", "config");
  json resolved = {{"measure", weight_sequence_to_json(seq)}, {"q", q}};
  write_manifest(ctx, "gibbs", resolved);
  json out = weight_sequence_to_json(gibbs_transform(seq, q));
  write_text(out_file(ctx, "gibbs.json"), out.dump(2) + "\n");
  return 0;
}

int cmd_dims(Ctx& ctx) {
  require_keys(ctx.cfg, {"measure", "horizon", "window_lo"}, "config");
  WeightSequence seq = weight_sequence_from_json(require_obj(ctx.cfg, "measure"));
  std::uint64_t N = ctx.cfg.value("horizon", std::uint64_t(10000));
  std::uint64_t wlo = ctx.cfg.value("window_lo", std::uint64_t(0));
  DimensionReport r = entropy_dimensions(seq, N, wlo);
  json resolved = {{"measure", weight_sequence_to_json(seq)},
                   {"horizon", r.horizon},
                   {"window_lo", r.window_lo}};
  write_manifest(ctx, "dims", resolved);
  write_text(out_file(ctx, "dims.json"), dimension_report_to_json(r).dump(2) + "\n");
  return 0;
}

int cmd_bounds(Ctx& ctx) {
  require_keys(ctx.cfg, {"measure", "q", "qgrid", "horizon", "window_lo"}, "config");
  json resolved;
  WeightSequence seq = weight_sequence_from_json(require_obj(ctx.cfg, "measure"));
  resolved["measure"] = weight_sequence_to_json(seq);
  double q = get_required<double>(ctx.cfg, "q", "config");
  resolved["q"] = q;
  auto qs = grid_or(ctx.cfg, "qgrid", -5.0, 5.0, 0.01, resolved);
  std::uint64_t N = ctx.cfg.value("horizon", std::uint64_t(1000));
  std::uint64_t wlo = ctx.cfg.value("window_lo", std::uint64_t(0));
  if (wlo == 0) wlo = std::max<std::uint64_t>(1, N / 2);
  resolved["horizon"] = N;
  resolved["window_lo"] = wlo;
  TauGrid g = tau_grid_running_sup(seq, qs, N, wlo);
  BoundsReport r = dimension_bounds(seq, q, N, wlo, g);
  write_manifest(ctx, "bounds", resolved);
  write_text(out_file(ctx, "bounds.json"), bounds_report_to_json(r).dump(2) + "\n");
  return 0;
}

int cmd_coarse(Ctx& ctx) {
  require_keys(ctx.cfg,
               {"measure", "depth", "edges", "bin_width", "enum_limit",
                "dp_resolution"},
               "config");
  json resolved;
  WeightSequence seq = weight_sequence_from_json(require_obj(ctx.cfg, "measure"));
  resolved["measure"] = weight_sequence_to_json(seq);
  auto depth = get_required<std::uint64_t>(ctx.cfg, "depth", "config");
  resolved["depth"] = depth;
  std::vector<double> edges;
  if (ctx.cfg.contains("edges")) {
    edges = grid_from(ctx.cfg.at("edges"), "edges");
    resolved["edges"] = ctx.cfg.at("edges");
  } else {
    double w = ctx.cfg.value("bin_width", 0.01);
    edges = default_alpha_edges(seq, depth, w);
    resolved["bin_width"] = w;
  }
  CoarseOptions opts;
  opts.enum_limit = ctx.cfg.value("enum_limit", opts.enum_limit);
  opts.dp_resolution = ctx.cfg.value("dp_resolution", opts.dp_resolution);
  resolved["enum_limit"] = opts.enum_limit;
  resolved["dp_resolution"] = opts.dp_resolution;
  write_manifest(ctx, "coarse", resolved);
  CoarseSpectrum cs = coarse_spectrum_with_f(seq, depth, edges, opts);
  std::ostringstream os;
  write_coarse_csv(os, cs);
  write_text(out_file(ctx, "coarse.csv"), os.str());
  return 0;
}

int cmd_sample(Ctx& ctx) {
  require_keys(ctx.cfg, {"measure", "sampler", "depth", "trials", "bins"}, "config");
  json resolved;
  WeightSequence mu = weight_sequence_from_json(require_obj(ctx.cfg, "measure"));
  WeightSequence sampler =
      ctx.cfg.contains("sampler")
          ? weight_sequence_from_json(ctx.cfg.at("sampler"))
          : mu;
  auto depth = get_required<std::uint64_t>(ctx.cfg, "depth", "config");
  auto trials = get_required<std::uint64_t>(ctx.cfg, "trials", "config");
  std::size_t bins = ctx.cfg.value("bins", std::size_t(40));
  resolved["measure"] = weight_sequence_to_json(mu);
  resolved["sampler"] = weight_sequence_to_json(sampler);
  resolved["depth"] = depth;
  resolved["trials"] = trials;
  resolved["bins"] = bins;
  write_manifest(ctx, "sample", resolved);
  SampleStats st = local_dimension_sample(mu, sampler, depth, trials, ctx.seed, bins);
  write_text(out_file(ctx, "sample.json"), sample_stats_to_json(st).dump(2) + "\n");
  std::ostringstream os;
  write_histogram_csv(os, st.histogram);
  write_text(out_file(ctx, "histogram.csv"), os.str());
  return 0;
}

int cmd_fit_transition(Ctx& ctx) {
  require_keys(ctx.cfg, {"combo", "q1", "q2", "p5"}, "config");
  ConvexCombo combo = combo_from_json(require_obj(ctx.cfg, "combo"));
  double q1 = get_required<double>(ctx.cfg, "q1", "config");
  double q2 = get_required<double>(ctx.cfg, "q2", "config");
  std::optional<double> p5;
  if (ctx.cfg.contains("p5")) p5 = ctx.cfg.at("p5").get<double>();
  json resolved = {{"combo", combo_to_json(combo)}, {"q1", q1}, {"q2", q2}};
  if (p5) resolved["p5"] = *p5;
  write_manifest(ctx, "fit-transition", resolved);
  TransitionFit fit = kink_fit(combo, q1, q2, p5);
  write_text(out_file(ctx, "fit.json"), transition_fit_to_json(fit).dump(2) + "\n");
  return 0;
}

int cmd_dense(Ctx& ctx) {
  require_keys(ctx.cfg,
               {"base", "stages", "pairs", "generate", "schedule", "p5", "q"},
               "config");
  json resolved;
  ConvexCombo base = combo_from_json(require_obj(ctx.cfg, "base"));
  resolved["base"] = combo_to_json(base);
  auto K = get_required<std::uint64_t>(ctx.cfg, "stages", "config");
  resolved["stages"] = K;

  std::vector<double> pts;
  if (ctx.cfg.contains("pairs")) {
    pts = get_required<std::vector<double>>(ctx.cfg, "pairs", "config");
    resolved["pairs"] = pts;
  } else {
    json g = ctx.cfg.contains("generate") ? ctx.cfg.at("generate") : json::object();
    require_keys(g, {"pairs", "delta", "q_max"}, "generate");
    auto np = g.value("pairs", K);
    double delta = g.value("delta", 0.1);
    double qmax = g.value("q_max", 10.0);
    resolved["generate"] = {{"pairs", np}, {"delta", delta}, {"q_max", qmax}};
    pts = NestedDenseSequence::generate(np, delta, qmax).points();
  }
  NestedDenseSequence qs(pts);

  BlockSchedule sched = schedule_from_json(
      ctx.cfg.contains("schedule") ? ctx.cfg.at("schedule")
                                   : json{{"rule", "factorial"}});
  resolved["schedule"] = schedule_to_json(sched);
  std::optional<double> p5;
  if (ctx.cfg.contains("p5")) p5 = ctx.cfg.at("p5").get<double>();
  if (p5) resolved["p5"] = *p5;

  auto qgrid = grid_or(ctx.cfg, "q", 1.2, 8.0, 0.02, resolved);
  write_manifest(ctx, "dense", resolved);

  DenseBuild build = dense_transition_build(qs, base, K, sched, p5);
  write_text(out_file(ctx, "dense.json"), dense_build_to_json(build).dump(2) + "\n");

  // analytic envelope over the q grid, the reference curve for the composite
  TauGrid env = tau_grid_from_function(
      [&](double q) { return envelope_tau(build.combos, q); }, qgrid);
  std::ostringstream os;
  write_tau_csv(os, env);
  write_text(out_file(ctx, "envelope.csv"), os.str());
  return 0;
}

int cmd_kinks(Ctx& ctx) {
  require_keys(ctx.cfg,
               {"combos", "measure", "q", "horizon", "window_lo", "threshold"},
               "config");
  json resolved;
  auto qs = grid_or(ctx.cfg, "q", 1.2, 8.0, 1e-4, resolved);
  double threshold = ctx.cfg.value("threshold", 5e-4);
  resolved["threshold"] = threshold;

  TauGrid g;
  if (ctx.cfg.contains("combos")) {
    std::vector<ConvexCombo> combos;
    for (const auto& c : ctx.cfg.at("combos")) combos.push_back(combo_from_json(c));
    json jc = json::array();
    for (const auto& c : combos) jc.push_back(combo_to_json(c));
    resolved["combos"] = jc;
    g = tau_grid_from_function(
        [&](double q) { return envelope_tau(combos, q); }, qs);
  } else {
    WeightSequence seq = weight_sequence_from_json(require_obj(ctx.cfg, "measure"));
    resolved["measure"] = weight_sequence_to_json(seq);
    std::uint64_t N = ctx.cfg.value("horizon", std::uint64_t(10000));
    std::uint64_t wlo = ctx.cfg.value("window_lo", std::uint64_t(0));
    resolved["horizon"] = N;
    resolved["window_lo"] = wlo;
    g = tau_grid_running_sup(seq, qs, N, wlo);
  }
  write_manifest(ctx, "kinks", resolved);
  json out = json::array();
  for (const KinkReport& k : detect_kinks(g, threshold)) out.push_back(kink_to_json(k));
  write_text(out_file(ctx, "kinks.json"), out.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// verify: the quick self-contained invariant suite

int cmd_verify(Ctx& ctx) {
  write_manifest(ctx, "verify", json::object());
  json checks = json::array();
  bool all_ok = true;
  auto record = [&](const std::string& name, bool ok, const std::string& detail) {
    checks.push_back({{"name", name}, {"pass", ok}, {"detail", detail}});
    all_ok &= ok;
  };

  // endpoint identities over deterministic pseudo-random sequences
  {
    std::mt19937_64 rng(20240901);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
      std::vector<double> ps(1 + rng() % 4);
      for (auto& p : ps) p = 0.02 + 0.96 * uniform01(rng);
      auto seq = WeightSequence::periodic(ps);
      std::size_t n = 1 + rng() % 300;
      worst = std::max(worst, std::abs(tau_partial(seq, n, 0.0) - 1.0));
      worst = std::max(worst, std::abs(tau_partial(seq, n, 1.0)));
    }
    record("endpoint-identities", worst < 1e-12, fmt_double(worst));
  }

  // uniform-measure collapse
  {
    auto g = tau_grid_running_sup(WeightSequence::constant(0.5),
                                  make_grid(-2.0, 2.0, 0.5), 64, 32);
    double worst = 0;
    for (std::size_t i = 0; i < g.q.size(); ++i)
      worst = std::max(worst, std::abs(g.tau[i] - (1.0 - g.q[i])));
    record("uniform-collapse", worst < 1e-10, fmt_double(worst));
    std::ostringstream os;
    write_tau_csv(os, g);
    write_text(out_file(ctx, "verify_tau.csv"), os.str());
  }

  // grouped Cesaro sums vs direct level-by-level summation
  {
    auto seq = WeightSequence::periodic({0.2, 0.45, 0.11});
    double worst = 0;
    for (double q : {-2.0, 0.5, 2.0, 3.5}) {
      double direct = 0;
      for (std::uint64_t j = 1; j <= 512; ++j)
        direct += tau_single(seq.weight_at(j), q);
      worst = std::max(worst, std::abs(tau_partial(seq, 512, q) - direct / 512.0));
    }
    record("grouped-sums", worst < 1e-12, fmt_double(worst));
  }

  // Gibbs spectrum identity
  {
    double gap = gibbs_tau_identity_gap(WeightSequence::periodic({0.15, 0.4}), 2.0,
                                        make_grid(-2.0, 2.0, 0.25), 100);
    record("gibbs-identity", gap < 1e-10, fmt_double(gap));
  }

  // exact coarse counting conserves the cylinder total
  {
    auto cs = coarse_spectrum_with_f(WeightSequence::periodic({0.25, 0.4}), 14,
                                     make_grid(0.0, 3.0, 0.01));
    bool ok = cs.total() == (BigInt(1) << 14);
    record("coarse-conservation", ok, cs.total().str());
    std::ostringstream os;
    write_coarse_csv(os, cs);
    write_text(out_file(ctx, "verify_coarse.csv"), os.str());
  }

  // perturbation sign pattern on the reference instance
  {
    bool ok = true;
    std::string detail = "ok";
    try {
      ConvexCombo base({{0.5, 0.1}, {0.5, 0.4}});
      auto fit = kink_fit(base, 2.0, 3.0);
      ok = fit.perturbed.tau(2.5) > base.tau(2.5) &&
           fit.perturbed.tau(1.5) < base.tau(1.5);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    record("perturbation-sign-pattern", ok, detail);
  }

  json out = {{"pass", all_ok}, {"checks", checks}};
  write_text(out_file(ctx, "verify.json"), out.dump(2) + "\n");
  std::cout << out.dump() << "\n";
  return all_ok ? 0 : 3;
}

// ---------------------------------------------------------------------------
// plot: SVG polylines from an emitted CSV

int cmd_plot(Ctx& ctx) {
  require_keys(ctx.cfg, {"input", "output", "columns"}, "config");
  auto input = get_required<std::string>(ctx.cfg, "input", "config");
  std::string output = ctx.cfg.value("output", std::string("plot.svg"));
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot open csv: " + input);

  std::string header;
  std::getline(in, header);
  std::vector<std::string> names;
  {
    std::istringstream hs(header);
    std::string tok;
    while (std::getline(hs, tok, ',')) names.push_back(tok);
  }
  if (names.size() < 2) throw ConfigError("csv needs at least two columns");
  std::vector<std::size_t> cols = {1};
  if (ctx.cfg.contains("columns"))
    cols = ctx.cfg.at("columns").get<std::vector<std::size_t>>();
  for (std::size_t c : cols)
    if (c < 1 || c >= names.size()) throw ConfigError("column index out of range");

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) {
      try {
        row.push_back(std::stod(tok));
      } catch (...) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
    if (row.size() == names.size()) rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ConfigError("csv has too few data rows to plot");

  json resolved = {{"input", input}, {"output", output}, {"columns", cols}};
  write_manifest(ctx, "plot", resolved);

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : rows) {
    xmin = std::min(xmin, r[0]);
    xmax = std::max(xmax, r[0]);
    for (std::size_t c : cols) {
      if (std::isnan(r[c])) continue;
      ymin = std::min(ymin, r[c]);
      ymax = std::max(ymax, r[c]);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;

  const double W = 800, H = 600, M = 60;
  auto X = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
  auto Y = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << ' ' << H
     << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M
     << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\""
     << H - M << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - M / 4 << "\">" << names[0]
     << "</text>\n";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    os << "<polyline fill=\"none\" stroke=\"" << palette[i % 5]
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : rows)
      if (!std::isnan(r[cols[i]])) os << X(r[0]) << ',' << Y(r[cols[i]]) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << W - M + 5 << "\" y=\"" << M + 20.0 * (double)i
       << "\" fill=\"" << palette[i % 5] << "\">" << names[cols[i]] << "</text>\n";
  }
  os << "</svg>\n";
  write_text(output, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inhomogeneous Bernoulli product toolkit"};
  app.require_subcommand(1);
  Ctx ctx;

  auto* measure = app.add_subcommand("measure", "cylinder-level queries");
  measure->require_subcommand(1);
  auto* measure_eval = measure->add_subcommand("eval", "evaluate one cylinder mass");
  add_common(measure_eval, ctx);
  auto* spectrum = app.add_subcommand("spectrum", "running-sup tau grid (CSV)");
  add_common(spectrum, ctx);
  auto* legendre = app.add_subcommand("legendre", "Legendre transform grid (CSV)");
  add_common(legendre, ctx);
  auto* gibbs = app.add_subcommand("gibbs", "q-lifted weight sequence (JSON)");
  add_common(gibbs, ctx);
  auto* dims = app.add_subcommand("dims", "entropy dimension window report (JSON)");
  add_common(dims, ctx);
  auto* bounds = app.add_subcommand("bounds", "two-sided dimension bounds (JSON)");
  add_common(bounds, ctx);
  auto* coarse = app.add_subcommand("coarse", "exact coarse spectrum (CSV)");
  add_common(coarse, ctx);
  auto* sample = app.add_subcommand("sample", "Monte Carlo local dimensions");
  add_common(sample, ctx);
  auto* fitt = app.add_subcommand("fit-transition", "three-term kink fit (JSON)");
  add_common(fitt, ctx);
  auto* dense = app.add_subcommand("dense", "dense-kink diagonal build (JSON+CSV)");
  add_common(dense, ctx);
  auto* kinks = app.add_subcommand("kinks", "slope-gap detection (JSON)");
  add_common(kinks, ctx);
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  add_common(verify, ctx);
  auto* plot = app.add_subcommand("plot", "SVG polylines from an emitted CSV");
  add_common(plot, ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
    return 1;
  }

  try {
    load_config(ctx);
    if (measure_eval->parsed()) return cmd_measure_eval(ctx);
    if (spectrum->parsed()) return cmd_spectrum(ctx);
    if (legendre->parsed()) return cmd_legendre(ctx);
    if (gibbs->parsed()) return cmd_gibbs(ctx);
    if (dims->parsed()) return cmd_dims(ctx);
    if (bounds->parsed()) return cmd_bounds(ctx);
    if (coarse->parsed()) return cmd_coarse(ctx);
    if (sample->parsed()) return cmd_sample(ctx);
    if (fitt->parsed()) return cmd_fit_transition(ctx);
    if (dense->parsed()) return cmd_dense(ctx);
    if (kinks->parsed()) return cmd_kinks(ctx);
    if (verify->parsed()) return cmd_verify(ctx);
    if (plot->parsed()) return cmd_plot(ctx);
  } catch (const ConstructionError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "construction"}}.dump() << "\n";
    return 2;
  } catch (const DegenerateSystemError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "construction"}}.dump() << "\n";
    return 2;
  } catch (const CoverageError& e) {
    std::cerr << json{{"error", e.what()},
                      {"kind", "construction"},
                      {"alpha_min", e.alpha_min},
                      {"alpha_max", e.alpha_max}}
                     .dump()
              << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
    return 1;
  }
  return 1;
}
