#pragma once

// Constructive machinery for phase transitions: convex combinations of
// per-weight tau functions, monotone-ratio certificates, the interpolating
// three-term replacement and its linear system, spectrum realization, and the
// diagonal composition producing dense sets of kinks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ibp/spectrum.hpp"
#include "ibp/weights.hpp"

namespace ibp {

// ---------------------------------------------------------------------------
// Convex combinations tau = sum lambda_i tau(p_i, .)

class ConvexCombo {
 public:
  struct Term {
    double lambda;
    double p;
  };

  explicit ConvexCombo(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw ConfigError("convex combination needs terms");
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.p < b.p; });
    // merge numerically identical weights
    std::vector<Term> merged;
    for (const Term& t : terms_) {
      if (!merged.empty() && std::abs(merged.back().p - t.p) <= 1e-12)
        merged.back().lambda += t.lambda;
      else
        merged.push_back(t);
    }
    terms_ = std::move(merged);
    double sum = 0;
    for (const Term& t : terms_) {
      if (!(t.p > 0 && t.p <= 0.5))
        throw ConfigError("combination weights p must lie in (0, 1/2]");
      if (!(t.lambda > 0)) throw ConfigError("lambda_i must be strictly positive");
      sum += t.lambda;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ConfigError("lambda_i must sum to 1");
  }

  const std::vector<Term>& terms() const { return terms_; }

  double tau(double q) const {
    double s = 0;
    for (const Term& t : terms_) s += t.lambda * tau_single(t.p, q);
    return s;
  }

  double tau_derivative(double q) const {
    double s = 0;
    for (const Term& t : terms_) s += t.lambda * ibp::tau_derivative(t.p, q);
    return s;
  }

 private:
  std::vector<Term> terms_;
};

/// Pointwise max of stage combinations; the analytic spectrum of the
/// diagonal construction.
inline double envelope_tau(const std::vector<ConvexCombo>& combos, double q) {
  double best = -std::numeric_limits<double>::infinity();
  for (const ConvexCombo& c : combos) best = std::max(best, c.tau(q));
  return best;
}

// ---------------------------------------------------------------------------
// Monotone-ratio certificate

/// (tau_1 - tau_2)/(tau_2 - tau_3) for p1 < p2 < p3 in (0, 1/2). Decreasing
/// on q in (1, +inf); the denominator is nonzero there since p -> tau(p,q)
/// is strictly decreasing on (0, 1/2) for q > 1.
inline double subsidiary_ratio(double p1, double p2, double p3, double q) {
  if (!(p1 < p2 && p2 < p3 && p1 > 0 && p3 < 0.5))
    throw std::invalid_argument("need ordered p1 < p2 < p3 in (0, 1/2)");
  if (!(q > 1)) throw std::invalid_argument("ratio defined for q > 1");
  double t1 = tau_single(p1, q), t2 = tau_single(p2, q), t3 = tau_single(p3, q);
  return (t1 - t2) / (t2 - t3);
}

// ---------------------------------------------------------------------------
// Crossing and interpolation

/// Unique q0 > 1 with tau_combo(q0) = tau(p0, q0), when the curves cross on
/// (1, q_max]. For p0 outside (p_1, p_2) no crossing is possible.
inline std::optional<double> crossing_point(const ConvexCombo& combo, double p0,
                                            double q_max = 50.0) {
  if (combo.terms().size() != 2)
    throw std::invalid_argument("crossing_point expects a two-term combination");
  if (!(p0 > 0 && p0 < 0.5))
    throw std::invalid_argument("p0 must lie in (0, 1/2)");
  double p1 = combo.terms()[0].p, p2 = combo.terms()[1].p;
  if (p0 <= p1 + 1e-15 || p0 >= p2 - 1e-15) return std::nullopt;
  auto g = [&](double q) { return combo.tau(q) - tau_single(p0, q); };
  // g > 0 before the crossing, < 0 after; scan for a sign change, then
  // bisect. The crossing can sit very close to 1, so the scan starts there.
  double step = 0.01;
  double prev_q = 1.0 + 1e-6, prev_g = g(prev_q);
  for (double q = prev_q + step; q <= q_max + 1e-12; q += step) {
    double cur = g(q);
    if (prev_g > 0 && cur <= 0) {
      double lo = prev_q, hi = q;
      for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) > 0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_q = q;
    prev_g = cur;
  }
  return std::nullopt;
}

/// The interpolating weight p4 in (p_1, p_2) with tau(p4, q1) = tau_combo(q1),
/// found by bisection on the strictly decreasing p -> tau(p, q1).
inline double match_p4(const ConvexCombo& combo, double q1) {
  if (combo.terms().size() != 2)
    throw std::invalid_argument("match_p4 expects a two-term combination");
  if (!(q1 > 1)) throw std::invalid_argument("match_p4 requires q1 > 1");
  double target = combo.tau(q1);
  double lo = combo.terms()[0].p, hi = combo.terms()[1].p;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    double mid = 0.5 * (lo + hi);
    (tau_single(mid, q1) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// The 3x3 linear system for the perturbed combination weights

struct SystemSolution {
  double l3, l4, l5;
};

/// Solves the 3x3 system matching the perturbed combination at q1, q2 with
/// lambda_3 + lambda_4 + lambda_5 = 1, over the basis tau(p_1,.), tau(p4,.),
/// tau(p5,.). All three components are strictly positive for valid inputs.
inline SystemSolution solve_weight_system(const ConvexCombo& combo, double q1,
                                     double q2, double p4, double p5) {
  if (combo.terms().size() != 2)
    throw std::invalid_argument("solve_weight_system expects a two-term combination");
  double p1 = combo.terms()[0].p, p2 = combo.terms()[1].p;
  if (!(1 < q1 && q1 < q2)) throw std::invalid_argument("need 1 < q1 < q2");
  if (!(p1 < p4 && p4 < p2 && p2 < p5 && p5 < 0.5))
    throw std::invalid_argument("need p1 < p4 < p2 < p5 < 1/2");
  if (std::abs(tau_single(p4, q1) - combo.tau(q1)) > 1e-8)
    throw std::invalid_argument("p4 must satisfy tau(p4, q1) = tau(q1)");

  double A[3][4] = {
      {tau_single(p1, q1), tau_single(p4, q1), tau_single(p5, q1), combo.tau(q1)},
      {tau_single(p1, q2), tau_single(p4, q2), tau_single(p5, q2), combo.tau(q2)},
      {1.0, 1.0, 1.0, 1.0}};

  double scale = 0;
  for (auto& row : A)
    for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(row[c]));

  // Gaussian elimination with partial pivoting
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-12 * scale)
      throw DegenerateSystemError("perturbation weight system is numerically singular");
    if (piv != col) std::swap(A[piv], A[col]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double f = A[r][col] / A[col][col];
      for (int c = col; c < 4; ++c) A[r][c] -= f * A[col][c];
    }
  }
  SystemSolution s{A[0][3] / A[0][0], A[1][3] / A[1][1], A[2][3] / A[2][2]};
  if (!(s.l3 > 0 && s.l4 > 0 && s.l5 > 0)) {
    std::ostringstream os;
    os << "perturbation weight system solution not strictly positive: (" << s.l3 << ", " << s.l4
       << ", " << s.l5 << "); check p4/p5";
    throw std::invalid_argument(os.str());
  }
  return s;
}

// ---------------------------------------------------------------------------
// The perturbation

struct TransitionFit {
  ConvexCombo perturbed;
  double q1, q2;
  double p4, p5;
  double l3, l4, l5;
};

namespace detail {

// Grid verification of the sign pattern: tilde < tau on (1, q1), > on
// (q1, q2), < beyond; equality and a genuine slope gap at the anchors.
inline void verify_perturbation(const ConvexCombo& base, const ConvexCombo& tilde,
                                double q1, double q2, double q_lo, double q_hi,
                                double step) {
  for (int i = 0; i <= 1; ++i) {
    double qa = i == 0 ? q1 : q2;
    double eq = std::abs(tilde.tau(qa) - base.tau(qa));
    if (eq > 1e-10)
      throw ConstructionError("perturbation misses the anchor value", qa);
    if (std::abs(tilde.tau_derivative(qa) - base.tau_derivative(qa)) < 1e-8)
      throw ConstructionError("perturbation has no slope gap at the anchor", qa);
  }
  for (double q = q_lo; q <= q_hi + 1e-12; q += step) {
    if (std::abs(q - q1) <= 0.5 * step || std::abs(q - q2) <= 0.5 * step) continue;
    double diff = tilde.tau(q) - base.tau(q);
    bool inside = q > q1 && q < q2;
    if (inside ? diff <= -1e-13 : diff >= 1e-13)
      throw ConstructionError("perturbation violates the sign pattern", q);
  }
}

}  // namespace detail

/// Replaces the first two terms of the combination by a three-term fix that
/// agrees with it at q1 and q2, lies above it strictly between them and
/// strictly below elsewhere on (1, +inf). p5 defaults to (p_2 + 1/2)/2.
inline TransitionFit kink_fit(const ConvexCombo& combo, double q1, double q2,
                                  std::optional<double> p5_opt = std::nullopt,
                                  double verify_q_hi = 10.0,
                                  double verify_step = 0.01) {
  if (!(1 < q1 && q1 < q2)) throw std::invalid_argument("need 1 < q1 < q2");
  const auto& ts = combo.terms();
  if (ts.size() < 2)
    throw std::invalid_argument("perturbation needs at least two terms");
  double w = ts[0].lambda + ts[1].lambda;
  ConvexCombo head({{ts[0].lambda / w, ts[0].p}, {ts[1].lambda / w, ts[1].p}});
  double p4 = match_p4(head, q1);
  double p5 = p5_opt.value_or((ts[1].p + 0.5) / 2.0);
  if (!(p5 > ts[1].p && p5 < 0.5))
    throw std::invalid_argument("p5 must lie in (p_2, 1/2)");
  SystemSolution s = solve_weight_system(head, q1, q2, p4, p5);

  std::vector<ConvexCombo::Term> out = {
      {w * s.l3, ts[0].p}, {w * s.l4, p4}, {w * s.l5, p5}};
  for (std::size_t k = 2; k < ts.size(); ++k) out.push_back(ts[k]);
  TransitionFit fit{ConvexCombo(std::move(out)), q1, q2, p4, p5, s.l3, s.l4, s.l5};
  detail::verify_perturbation(combo, fit.perturbed, q1, q2, 1.0 + verify_step,
                              verify_q_hi, verify_step);
  return fit;
}

inline ConvexCombo kink_perturb(const ConvexCombo& combo, double q1, double q2,
                                    std::optional<double> p5 = std::nullopt) {
  return kink_fit(combo, q1, q2, p5).perturbed;
}

// ---------------------------------------------------------------------------
// Realization and composition

/// Inhomogeneous Bernoulli product whose partial spectra converge to the
/// combination, via the greedy low-discrepancy level assignment.
inline WeightSequence realize_measure(const ConvexCombo& combo) {
  std::vector<WeightSequence::Term> terms;
  terms.reserve(combo.terms().size());
  for (const auto& t : combo.terms()) terms.push_back({t.lambda, t.p});
  return WeightSequence::low_discrepancy(std::move(terms));
}

/// Block-interleaved composition cycling the given measures over schedule
/// blocks; the running-sup spectrum approaches max_i tau_i from below as the
/// truncated schedule grows.
inline WeightSequence interleave_max(std::vector<WeightSequence> measures,
                                     const BlockSchedule& schedule) {
  if (measures.size() < 2)
    throw std::invalid_argument("interleave_max needs at least two measures");
  return WeightSequence::block_interleaved(std::move(measures), schedule);
}

// ---------------------------------------------------------------------------
// Nested dense target sequences

/// Enumeration (q_n) of points > 1, consumed in pairs (q_{2n+1}, q_{2n+2})
/// with q_{2n+1} < q_{2n+2} and every earlier point outside the new pair's
/// interval, so each perturbation acts on untouched ground.
class NestedDenseSequence {
 public:
  explicit NestedDenseSequence(std::vector<double> qs) : qs_(std::move(qs)) {
    if (qs_.size() < 2 || qs_.size() % 2 != 0)
      throw ConfigError("nested sequence needs an even number (>= 2) of points");
    for (double q : qs_)
      if (!(q > 1)) throw ConfigError("all points must exceed 1");
    for (std::size_t n = 0; 2 * n + 1 < qs_.size(); ++n) {
      double a = qs_[2 * n], b = qs_[2 * n + 1];
      if (!(a < b)) throw ConfigError("pair lower point must be below upper point");
      for (std::size_t i = 0; i < 2 * n; ++i)
        if (qs_[i] >= a && qs_[i] <= b)
          throw ConfigError("earlier point falls inside a later pair interval");
    }
  }

  /// Midpoint-refinement generator: each new pair is the middle third of the
  /// currently largest gap between already-used points, so the enumeration is
  /// dense in (1 + delta, q_max) in the limit.
  static NestedDenseSequence generate(std::size_t pairs, double delta = 0.1,
                                      double q_max = 10.0) {
    if (pairs < 1) throw ConfigError("need at least one pair");
    std::set<double> pts = {1.0 + delta, q_max};
    std::vector<double> qs;
    for (std::size_t n = 0; n < pairs; ++n) {
      double best_lo = 0, best_gap = -1;
      for (auto it = pts.begin(); std::next(it) != pts.end(); ++it) {
        double gap = *std::next(it) - *it;
        if (gap > best_gap) {
          best_gap = gap;
          best_lo = *it;
        }
      }
      double a = best_lo + best_gap / 3.0;
      double b = best_lo + 2.0 * best_gap / 3.0;
      qs.push_back(a);
      qs.push_back(b);
      pts.insert(a);
      pts.insert(b);
    }
    return NestedDenseSequence(std::move(qs));
  }

  std::size_t pairs() const { return qs_.size() / 2; }
  std::pair<double, double> pair_at(std::size_t i) const {
    if (2 * i + 1 >= qs_.size()) throw std::out_of_range("pair index out of range");
    return {qs_[2 * i], qs_[2 * i + 1]};
  }
  const std::vector<double>& points() const { return qs_; }

 private:
  std::vector<double> qs_;
};

// ---------------------------------------------------------------------------
// Kink detection

struct KinkReport {
  double q = 0;
  double slope_left = 0;
  double slope_right = 0;
  double gap = 0;  // slope_right - slope_left
  double threshold = 0;
};

/// Interior grid points where the one-sided secants differ by at least the
/// threshold.
inline std::vector<KinkReport> detect_kinks(const TauGrid& tau, double threshold) {
  if (!(threshold > 0)) throw std::invalid_argument("threshold must be > 0");
  std::vector<KinkReport> out;
  for (std::size_t i = 1; i + 1 < tau.q.size(); ++i) {
    double gap = tau.slope_right[i] - tau.slope_left[i];
    if (std::abs(gap) >= threshold)
      out.push_back({tau.q[i], tau.slope_left[i], tau.slope_right[i], gap, threshold});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense-transition diagonal construction

struct DenseBuild {
  WeightSequence sequence;               // the composite diagonal sequence
  std::vector<ConvexCombo> combos;       // combos[0] = base, then one per stage
  std::vector<std::pair<double, double>> intervals;  // stage target intervals
  std::vector<std::size_t> perturbed_from;           // combo index each stage fixed
  BlockSchedule schedule;
};

/// Iterates the perturbation along the nested pair intervals, realizes every
/// stage combination, composes the stage measures cyclically and stacks them
/// diagonally over schedule blocks.
inline DenseBuild dense_transition_build(const NestedDenseSequence& qs,
                                         const ConvexCombo& base, std::size_t K,
                                         const BlockSchedule& schedule,
                                         std::optional<double> p5 = std::nullopt) {
  if (K < 1) throw std::invalid_argument("need at least one stage");
  if (qs.pairs() < K)
    throw std::invalid_argument("nested sequence provides too few pairs");
  if (base.terms().size() != 2)
    throw std::invalid_argument("base must be a two-term combination");

  std::vector<ConvexCombo> combos = {base};
  std::vector<std::pair<double, double>> intervals;
  std::vector<std::size_t> sources;

  for (std::size_t k = 0; k < K; ++k) {
    auto [a, b] = qs.pair_at(k);
    // the combo achieving the envelope max on [a,b]; it must not switch
    // inside the interval
    std::size_t j = 0;
    bool first = true;
    for (int g = 0; g <= 100; ++g) {
      double q = a + (b - a) * static_cast<double>(g) / 100.0;
      double best = combos[0].tau(q);
      std::size_t arg = 0;
      for (std::size_t c = 1; c < combos.size(); ++c) {
        double v = combos[c].tau(q);
        if (v > best + 1e-12) {
          best = v;
          arg = c;
        }
      }
      if (first) {
        j = arg;
        first = false;
      } else if (arg != j) {
        std::ostringstream os;
        os << "envelope maximizer switches inside target interval [" << a << ", "
           << b << "]";
        throw ConstructionError(os.str(), q);
      }
    }
    combos.push_back(kink_fit(combos[j], a, b, p5).perturbed);
    intervals.emplace_back(a, b);
    sources.push_back(j);
  }

  std::vector<WeightSequence> measures;
  measures.reserve(combos.size());
  for (const ConvexCombo& c : combos) measures.push_back(realize_measure(c));

  std::vector<WeightSequence> stages;
  stages.reserve(measures.size());
  for (std::size_t k = 1; k <= measures.size(); ++k) {
    if (k == 1)
      stages.push_back(measures[0]);
    else
      stages.push_back(interleave_max(
          std::vector<WeightSequence>(measures.begin(), measures.begin() + k),
          schedule));
  }
  WeightSequence composite = WeightSequence::diagonal(std::move(stages), schedule);
  return DenseBuild{std::move(composite), std::move(combos), std::move(intervals),
                    std::move(sources), schedule};
}

}  // namespace ibp
