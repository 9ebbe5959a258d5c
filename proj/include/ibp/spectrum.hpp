#pragma once

// L^q-spectra of inhomogeneous Bernoulli products: per-weight tau, Cesaro
// partials, closed-form derivatives, Legendre transforms and generalized
// dimensions. All logarithms are base 2, so tau(q=0) = 1 and tau(q=1) = 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ibp/weights.hpp"

namespace ibp {

inline constexpr double kLn2 = 0.6931471805599453094;

/// tau(p,q) = log2(p^q + (1-p)^q), evaluated in log-sum-exp form.
inline double tau_single(double p, double q) {
  double a = q * std::log2(p);
  double b = q * std::log2(1.0 - p);
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

/// d tau / dq in base 2. Equals (w ln p + (1-w) ln(1-p)) / ln 2 with the
/// Gibbs weight w = p^q / (p^q + (1-p)^q).
inline double tau_derivative(double p, double q) {
  double w = WeightSequence::gibbs_weight(p, q);
  return (w * std::log(p) + (1.0 - w) * std::log(1.0 - p)) / kLn2;
}

/// d^2 tau / dq^2 = w(1-w) (ln(p/(1-p)))^2 / ln 2.
inline double tau_second_derivative(double p, double q) {
  double w = WeightSequence::gibbs_weight(p, q);
  double d = std::log(p / (1.0 - p));
  return w * (1.0 - w) * d * d / kLn2;
}

/// Uniform second-derivative bound [4p(1-p)]^{q0} (ln p)^2 / ln 2, valid for
/// all q >= q0. The constant is stated for p <= 1/2; tau'' is symmetric under
/// p <-> 1-p, so larger p are reflected first. Checks the bound on the
/// sampled qs (defaults to a spread of scales).
inline bool second_derivative_bound_holds(double p, double q0,
                                          std::vector<double> qs = {}) {
  if (!(q0 > 0)) throw std::invalid_argument("bound requires q0 > 0");
  if (qs.empty()) qs = {q0, q0 * 1.5, q0 * 2, q0 * 5, q0 * 10, q0 + 10};
  if (p > 0.5) p = 1.0 - p;
  double lp = std::log(p);
  double bound = std::pow(4.0 * p * (1.0 - p), q0) * lp * lp / kLn2;
  for (double q : qs) {
    if (q < q0) continue;
    if (tau_second_derivative(p, q) > bound + 1e-12) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Grouped level streams

/// Distinct weight values of a prefix with per-level indices; lets every
/// Cesaro sum run in O(#distinct) per q.
struct ValueStream {
  std::vector<double> values;        // distinct weights, first-appearance order
  std::vector<std::uint32_t> index;  // index[j-1] = distinct id of level j
  std::vector<std::uint64_t> counts; // totals over the whole prefix
};

inline ValueStream value_stream(const WeightSequence& seq, std::size_t n) {
  ValueStream vs;
  vs.index.reserve(n);
  std::unordered_map<double, std::uint32_t> ids;
  for (std::uint64_t j = 1; j <= n; ++j) {
    double p = seq.weight_at(j);
    auto [it, inserted] = ids.try_emplace(p, static_cast<std::uint32_t>(vs.values.size()));
    if (inserted) {
      vs.values.push_back(p);
      vs.counts.push_back(0);
    }
    vs.index.push_back(it->second);
    ++vs.counts[it->second];
  }
  return vs;
}

/// tau_n(q) over the full prefix held by the stream.
inline double tau_partial(const ValueStream& vs, double q) {
  double s = 0;
  for (std::size_t v = 0; v < vs.values.size(); ++v)
    s += static_cast<double>(vs.counts[v]) * tau_single(vs.values[v], q);
  return s / static_cast<double>(vs.index.size());
}

/// tau_n(q) = (1/n) sum_{i<=n} tau(p_i, q).
inline double tau_partial(const WeightSequence& seq, std::size_t n, double q) {
  if (n < 1) throw std::invalid_argument("depth must be >= 1");
  return tau_partial(value_stream(seq, n), q);
}

/// Cesaro average of tau_derivative over the stream's prefix.
inline double tau_partial_derivative(const ValueStream& vs, double q) {
  double s = 0;
  for (std::size_t v = 0; v < vs.values.size(); ++v)
    s += static_cast<double>(vs.counts[v]) * tau_derivative(vs.values[v], q);
  return s / static_cast<double>(vs.index.size());
}

inline double tau_partial_derivative(const WeightSequence& seq, std::size_t n,
                                     double q) {
  if (n < 1) throw std::invalid_argument("depth must be >= 1");
  return tau_partial_derivative(value_stream(seq, n), q);
}

struct RunningSup {
  double value;
  std::uint64_t argmax_n;
};

/// max over n in [lo, hi] of tau_n(q), with the achieving depth.
inline RunningSup running_sup_tau(const ValueStream& vs, double q,
                                  std::uint64_t lo, std::uint64_t hi) {
  hi = std::min<std::uint64_t>(hi, vs.index.size());
  lo = std::max<std::uint64_t>(lo, 1);
  if (lo > hi) throw std::invalid_argument("empty running-sup window");
  std::vector<double> tv(vs.values.size());
  for (std::size_t v = 0; v < tv.size(); ++v) tv[v] = tau_single(vs.values[v], q);
  double acc = 0;
  RunningSup best{-std::numeric_limits<double>::infinity(), 0};
  for (std::uint64_t n = 1; n <= hi; ++n) {
    acc += tv[vs.index[n - 1]];
    if (n >= lo) {
      double t = acc / static_cast<double>(n);
      if (t > best.value) best = {t, n};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Grids

inline std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0) || !(hi >= lo)) throw std::invalid_argument("bad grid bounds");
  std::vector<double> g;
  std::size_t count = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  g.reserve(count);
  for (std::size_t i = 0; i < count; ++i) g.push_back(lo + step * static_cast<double>(i));
  if (g.back() > hi + step * 1e-9) g.pop_back();
  return g;
}

/// q-grid with tau values, one-sided secant slopes, and the depth that
/// produced each value (0 when the source is an analytic formula).
struct TauGrid {
  std::vector<double> q;
  std::vector<double> tau;
  std::vector<double> slope_left;
  std::vector<double> slope_right;
  std::vector<std::uint64_t> source_n;
  std::uint64_t horizon = 0;    // 0 for analytic grids
  std::uint64_t window_lo = 0;  // running-sup window [window_lo, horizon]

  double step_hint() const {
    return q.size() > 1 ? (q.back() - q.front()) / static_cast<double>(q.size() - 1)
                        : 0.0;
  }
};

inline void fill_slopes(TauGrid& g) {
  std::size_t n = g.q.size();
  g.slope_left.assign(n, 0.0);
  g.slope_right.assign(n, 0.0);
  if (n < 2) return;
  for (std::size_t i = 0; i + 1 < n; ++i)
    g.slope_right[i] = (g.tau[i + 1] - g.tau[i]) / (g.q[i + 1] - g.q[i]);
  for (std::size_t i = 1; i < n; ++i) g.slope_left[i] = g.slope_right[i - 1];
  g.slope_left[0] = g.slope_right[0];
  g.slope_right[n - 1] = g.slope_left[n - 1];
}

inline TauGrid tau_grid_from_function(const std::function<double(double)>& f,
                                      std::vector<double> qs) {
  if (qs.empty()) throw std::invalid_argument("empty q-grid");
  TauGrid g;
  g.q = std::move(qs);
  g.tau.reserve(g.q.size());
  for (double q : g.q) g.tau.push_back(f(q));
  g.source_n.assign(g.q.size(), 0);
  fill_slopes(g);
  return g;
}

/// Finite-horizon surrogate for tau = limsup tau_n: the running sup of
/// tau_n(q) over n in [window_lo, N]. window_lo = 0 means N/2.
inline TauGrid tau_grid_running_sup(const WeightSequence& seq,
                                    std::vector<double> qs, std::uint64_t N,
                                    std::uint64_t window_lo = 0) {
  if (qs.empty()) throw std::invalid_argument("empty q-grid");
  if (N < 1) throw std::invalid_argument("horizon must be >= 1");
  if (window_lo == 0) window_lo = std::max<std::uint64_t>(1, N / 2);
  ValueStream vs = value_stream(seq, N);
  TauGrid g;
  g.q = std::move(qs);
  g.horizon = N;
  g.window_lo = window_lo;
  g.tau.reserve(g.q.size());
  g.source_n.reserve(g.q.size());
  for (double q : g.q) {
    RunningSup rs = running_sup_tau(vs, q, window_lo, N);
    g.tau.push_back(rs.value);
    g.source_n.push_back(rs.argmax_n);
  }
  fill_slopes(g);
  return g;
}

// ---------------------------------------------------------------------------
// Legendre transform

/// Grid infimum of alpha*q + tau(q). Flags: 0 interior minimizer, 1 boundary
/// (the true infimum may lie outside the q-range), 2 flat minimum.
struct LegendreGrid {
  std::vector<double> alpha;
  std::vector<double> tau_star;
  std::vector<double> argmin_q;
  std::vector<int> flag;
};

inline LegendreGrid legendre_transform(const TauGrid& tau,
                                       const std::vector<double>& alphas) {
  if (tau.q.empty() || alphas.empty())
    throw std::invalid_argument("legendre transform needs nonempty grids");
  LegendreGrid lg;
  lg.alpha = alphas;
  std::size_t m = tau.q.size();
  for (double a : alphas) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    std::size_t ties = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double v = a * tau.q[i] + tau.tau[i];
      if (v < best - 1e-12) {
        best = v;
        arg = i;
        ties = 1;
      } else if (v <= best + 1e-12) {
        ++ties;
        if (v < best) best = v;
      }
    }
    int flag = 0;
    if (arg == 0 || arg == m - 1) flag = 1;
    if (ties > 2) flag = 2;
    lg.tau_star.push_back(best);
    lg.argmin_q.push_back(tau.q[arg]);
    lg.flag.push_back(flag);
  }
  return lg;
}

/// Linear interpolation of tau_star at alpha; NaN outside the grid range.
inline double legendre_interp(const LegendreGrid& lg, double alpha) {
  const auto& xs = lg.alpha;
  if (alpha < xs.front() - 1e-12 || alpha > xs.back() + 1e-12)
    return std::numeric_limits<double>::quiet_NaN();
  auto it = std::lower_bound(xs.begin(), xs.end(), alpha);
  if (it == xs.begin()) return lg.tau_star.front();
  if (it == xs.end()) return lg.tau_star.back();
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  double t = (alpha - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return lg.tau_star[i - 1] * (1.0 - t) + lg.tau_star[i] * t;
}

// ---------------------------------------------------------------------------
// Generalized dimensions

/// D_q = -tau(q)/(q-1) under this encoding (tau decreasing, tau(0)=1), so
/// the uniform measure gives D_q = 1 for all q. At q = 1 the entropy limit
/// -tau'(1) is taken from the grid's one-sided slopes.
inline std::vector<double> generalized_dimensions(const TauGrid& tau) {
  std::vector<double> d;
  d.reserve(tau.q.size());
  for (std::size_t i = 0; i < tau.q.size(); ++i) {
    double q = tau.q[i];
    if (std::abs(q - 1.0) < 1e-9)
      d.push_back(-(tau.slope_left[i] + tau.slope_right[i]) / 2.0);
    else
      d.push_back(-tau.tau[i] / (q - 1.0));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Maximizing subsequences

/// All depths n <= N whose tau_n(q) comes within eps of the best over the
/// horizon, each with its Cesaro-average derivative. Along such indices the
/// derivatives cluster when tau is differentiable at q.
struct MaxSubsequence {
  std::vector<std::uint64_t> indices;
  std::vector<double> tau_values;
  std::vector<double> derivatives;
  double max_tau = 0;
};

inline MaxSubsequence maximizing_subsequence(const WeightSequence& seq, double q,
                                             std::uint64_t N, double eps) {
  if (N < 1 || !(eps > 0)) throw std::invalid_argument("need N >= 1 and eps > 0");
  ValueStream vs = value_stream(seq, N);
  std::vector<double> tv(vs.values.size()), dv(vs.values.size());
  for (std::size_t v = 0; v < vs.values.size(); ++v) {
    tv[v] = tau_single(vs.values[v], q);
    dv[v] = tau_derivative(vs.values[v], q);
  }
  std::vector<double> tau_n(N), der_n(N);
  double at = 0, ad = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 1; n <= N; ++n) {
    at += tv[vs.index[n - 1]];
    ad += dv[vs.index[n - 1]];
    tau_n[n - 1] = at / static_cast<double>(n);
    der_n[n - 1] = ad / static_cast<double>(n);
    best = std::max(best, tau_n[n - 1]);
  }
  MaxSubsequence out;
  out.max_tau = best;
  for (std::uint64_t n = 1; n <= N; ++n) {
    if (tau_n[n - 1] >= best - eps) {
      out.indices.push_back(n);
      out.tau_values.push_back(tau_n[n - 1]);
      out.derivatives.push_back(der_n[n - 1]);
    }
  }
  return out;
}

}  // namespace ibp
