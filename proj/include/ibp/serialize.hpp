#pragma once

// JSON config schema for weight sequences, schedules and combinations, plus
// the CSV/JSON artifact writers. CSV uses '.' decimals, no locale, floats at
// 17 significant digits, exact integers in decimal.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibp/coarse.hpp"
#include "ibp/gibbs.hpp"
#include "ibp/spectrum.hpp"
#include "ibp/transitions.hpp"
#include "ibp/weights.hpp"

namespace ibp {

using nlohmann::json;

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void require_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad value for '" + std::string(key) + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Block schedules

inline json schedule_to_json(const BlockSchedule& s) {
  switch (s.rule()) {
    case BlockSchedule::Rule::Factorial:
      return {{"rule", "factorial"}};
    case BlockSchedule::Rule::Geometric:
      return {{"rule", "geometric"}, {"c", s.geometric_c()}, {"r", s.geometric_r()}};
    case BlockSchedule::Rule::Explicit:
      return {{"rule", "explicit"}, {"lengths", s.explicit_lens()}};
  }
  throw std::logic_error("unreachable");
}

inline BlockSchedule schedule_from_json(const json& j) {
  require_keys(j, {"rule", "c", "r", "lengths"}, "schedule");
  auto rule = get_required<std::string>(j, "rule", "schedule");
  if (rule == "factorial") return BlockSchedule::factorial();
  if (rule == "geometric")
    return BlockSchedule::geometric(get_required<std::uint64_t>(j, "c", "schedule"),
                                    get_required<std::uint64_t>(j, "r", "schedule"));
  if (rule == "explicit")
    return BlockSchedule::explicit_lengths(
        get_required<std::vector<std::uint64_t>>(j, "lengths", "schedule"));
  throw ConfigError("schedule: unknown rule '" + rule + "'");
}

// ---------------------------------------------------------------------------
// Weight sequences

inline json weight_sequence_to_json(const WeightSequence& s) {
  json j;
  switch (s.kind()) {
    case WeightKind::Constant:
      j = {{"kind", "constant"}, {"p", s.values()[0]}};
      break;
    case WeightKind::Periodic:
      j = {{"kind", "periodic"}, {"weights", s.values()}};
      break;
    case WeightKind::Explicit:
      j = {{"kind", "explicit"}, {"weights", s.values()}};
      break;
    case WeightKind::LowDiscrepancy: {
      json terms = json::array();
      for (const auto& t : s.terms()) terms.push_back({t.lambda, t.p});
      j = {{"kind", "low-discrepancy"}, {"terms", terms}};
      break;
    }
    case WeightKind::BlockInterleaved:
    case WeightKind::Diagonal: {
      json kids = json::array();
      for (const auto& c : s.children()) kids.push_back(weight_sequence_to_json(c));
      const char* kind =
          s.kind() == WeightKind::BlockInterleaved ? "block-interleaved" : "diagonal";
      const char* key =
          s.kind() == WeightKind::BlockInterleaved ? "components" : "stages";
      j = {{"kind", kind}, {key, kids}, {"schedule", schedule_to_json(s.schedule())}};
      break;
    }
    case WeightKind::Gibbs:
      j = {{"kind", "gibbs"},
           {"base", weight_sequence_to_json(s.children()[0])},
           {"q", s.gibbs_q()}};
      break;
  }
  return j;
}

inline WeightSequence weight_sequence_from_json(const json& j) {
  require_keys(j,
               {"kind", "p", "weights", "terms", "components", "stages", "schedule",
                "base", "q"},
               "measure");
  auto kind = get_required<std::string>(j, "kind", "measure");
  if (kind == "constant")
    return WeightSequence::constant(get_required<double>(j, "p", "measure"));
  if (kind == "periodic")
    return WeightSequence::periodic(
        get_required<std::vector<double>>(j, "weights", "measure"));
  if (kind == "explicit")
    return WeightSequence::explicit_list(
        get_required<std::vector<double>>(j, "weights", "measure"));
  if (kind == "low-discrepancy") {
    if (!j.contains("terms")) throw ConfigError("measure: missing key 'terms'");
    std::vector<WeightSequence::Term> terms;
    for (const auto& t : j.at("terms")) {
      if (!t.is_array() || t.size() != 2)
        throw ConfigError("measure: each term must be a [lambda, p] pair");
      terms.push_back({t[0].get<double>(), t[1].get<double>()});
    }
    return WeightSequence::low_discrepancy(std::move(terms));
  }
  if (kind == "block-interleaved" || kind == "diagonal") {
    const char* key = kind == "block-interleaved" ? "components" : "stages";
    if (!j.contains(key))
      throw ConfigError("measure: missing key '" + std::string(key) + "'");
    std::vector<WeightSequence> kids;
    for (const auto& c : j.at(key)) kids.push_back(weight_sequence_from_json(c));
    BlockSchedule sched = schedule_from_json(
        j.contains("schedule") ? j.at("schedule") : json{{"rule", "factorial"}});
    return kind == "block-interleaved"
               ? WeightSequence::block_interleaved(std::move(kids), std::move(sched))
               : WeightSequence::diagonal(std::move(kids), std::move(sched));
  }
  if (kind == "gibbs") {
    if (!j.contains("base")) throw ConfigError("measure: missing key 'base'");
    return WeightSequence::gibbs(weight_sequence_from_json(j.at("base")),
                                 get_required<double>(j, "q", "measure"));
  }
  throw ConfigError("measure: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Convex combinations

inline json combo_to_json(const ConvexCombo& c) {
  json terms = json::array();
  for (const auto& t : c.terms()) terms.push_back({t.lambda, t.p});
  return {{"terms", terms}};
}

inline ConvexCombo combo_from_json(const json& j) {
  require_keys(j, {"terms"}, "combo");
  if (!j.contains("terms")) throw ConfigError("combo: missing key 'terms'");
  std::vector<ConvexCombo::Term> terms;
  for (const auto& t : j.at("terms")) {
    if (!t.is_array() || t.size() != 2)
      throw ConfigError("combo: each term must be a [lambda, p] pair");
    terms.push_back({t[0].get<double>(), t[1].get<double>()});
  }
  return ConvexCombo(std::move(terms));
}

// ---------------------------------------------------------------------------
// CSV writers

inline void write_tau_csv(std::ostream& os, const TauGrid& g) {
  os << "q,tau,slope_left,slope_right,source_n\n";
  for (std::size_t i = 0; i < g.q.size(); ++i)
    os << fmt_double(g.q[i]) << ',' << fmt_double(g.tau[i]) << ','
       << fmt_double(g.slope_left[i]) << ',' << fmt_double(g.slope_right[i]) << ','
       << g.source_n[i] << '\n';
}

inline void write_legendre_csv(std::ostream& os, const LegendreGrid& g) {
  os << "alpha,tau_star,argmin_q,boundary_flag\n";
  for (std::size_t i = 0; i < g.alpha.size(); ++i)
    os << fmt_double(g.alpha[i]) << ',' << fmt_double(g.tau_star[i]) << ','
       << fmt_double(g.argmin_q[i]) << ',' << g.flag[i] << '\n';
}

inline void write_coarse_csv(std::ostream& os, const CoarseSpectrum& cs) {
  os << "alpha_low,alpha_high,count,f_value,spill_count\n";
  for (const CoarseBin& b : cs.bins)
    os << fmt_double(b.lo) << ',' << fmt_double(b.hi) << ',' << b.count.str() << ','
       << fmt_double(b.f) << ',' << b.spill.str() << '\n';
}

inline void write_histogram_csv(std::ostream& os,
                                const std::vector<HistogramBin>& bins) {
  os << "alpha_bin_low,alpha_bin_high,count\n";
  for (const HistogramBin& b : bins)
    os << fmt_double(b.lo) << ',' << fmt_double(b.hi) << ',' << b.count << '\n';
}

// ---------------------------------------------------------------------------
// Report JSON

inline json dimension_report_to_json(const DimensionReport& r) {
  return {{"h_lower", r.h_lower},
          {"h_upper", r.h_upper},
          {"horizon", r.horizon},
          {"window_lo", r.window_lo}};
}

inline json bounds_report_to_json(const BoundsReport& r) {
  return {{"q", r.q},
          {"lower", r.lower},
          {"upper_right", r.upper_right},
          {"upper_left", r.upper_left},
          {"horizon", r.horizon},
          {"window_lo", r.window_lo},
          {"grid_step", r.grid_step}};
}

inline json sample_stats_to_json(const SampleStats& s) {
  return {{"mean", s.mean},
          {"stddev", s.stddev},
          {"depth", s.depth},
          {"trials", s.trials},
          {"seed", s.seed}};
}

inline json kink_to_json(const KinkReport& k) {
  return {{"q", k.q},
          {"slope_left", k.slope_left},
          {"slope_right", k.slope_right},
          {"gap", k.gap},
          {"threshold", k.threshold}};
}

inline json transition_fit_to_json(const TransitionFit& f) {
  return {{"perturbed", combo_to_json(f.perturbed)},
          {"q1", f.q1},
          {"q2", f.q2},
          {"p4", f.p4},
          {"p5", f.p5},
          {"lambda3", f.l3},
          {"lambda4", f.l4},
          {"lambda5", f.l5}};
}

/// Manifest from which the composite measure can be rebuilt byte-identically.
inline json dense_build_to_json(const DenseBuild& b) {
  json stages = json::array();
  for (std::size_t k = 0; k < b.intervals.size(); ++k)
    stages.push_back({{"combo", combo_to_json(b.combos[k + 1])},
                      {"interval", {b.intervals[k].first, b.intervals[k].second}},
                      {"perturbed_from", b.perturbed_from[k]}});
  return {{"base", combo_to_json(b.combos[0])},
          {"stages", stages},
          {"schedule", schedule_to_json(b.schedule)},
          {"sequence", weight_sequence_to_json(b.sequence)}};
}

}  // namespace ibp
