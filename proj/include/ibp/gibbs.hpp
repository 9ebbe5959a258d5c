#pragma once

// Gibbs transforms nu_q, entropy dimensions, computable two-sided dimension
// bounds, and Monte Carlo local-dimension statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "ibp/spectrum.hpp"
#include "ibp/weights.hpp"

namespace ibp {

/// nu with nu(I) proportional to mu(I)^q. For Bernoulli products this is
/// again a Bernoulli product with weights p^q/(p^q + (1-p)^q).
inline WeightSequence gibbs_transform(const WeightSequence& seq, double q) {
  return WeightSequence::gibbs(seq, q);
}

/// Sup-norm gap of tau_{nu,n}(s) = tau_{mu,n}(qs) - s tau_{mu,n}(q) over the
/// s-grid at depth n.
inline double gibbs_tau_identity_gap(const WeightSequence& seq, double q,
                                     const std::vector<double>& s_grid,
                                     std::size_t n) {
  if (n < 1) throw std::invalid_argument("depth must be >= 1");
  ValueStream mu = value_stream(seq, n);
  ValueStream nu = value_stream(gibbs_transform(seq, q), n);
  double tau_mu_q = tau_partial(mu, q);
  double gap = 0;
  for (double s : s_grid) {
    double lhs = tau_partial(nu, s);
    double rhs = tau_partial(mu, q * s) - s * tau_mu_q;
    gap = std::max(gap, std::abs(lhs - rhs));
  }
  return gap;
}

/// liminf/limsup surrogates of -tau_n'(1) over a window [window_lo, N];
/// these are the Hausdorff and packing dimensions of the measure.
struct DimensionReport {
  double h_lower = 0;
  double h_upper = 0;
  std::uint64_t horizon = 0;
  std::uint64_t window_lo = 0;
};

inline DimensionReport entropy_dimensions(const WeightSequence& seq,
                                          std::uint64_t N,
                                          std::uint64_t window_lo = 0) {
  if (N < 2) throw std::invalid_argument("horizon must be >= 2");
  if (window_lo == 0) window_lo = std::max<std::uint64_t>(1, N / 2);
  ValueStream vs = value_stream(seq, N);
  std::vector<double> dv(vs.values.size());
  for (std::size_t v = 0; v < vs.values.size(); ++v)
    dv[v] = tau_derivative(vs.values[v], 1.0);
  double acc = 0;
  DimensionReport r;
  r.horizon = N;
  r.window_lo = window_lo;
  r.h_lower = std::numeric_limits<double>::infinity();
  r.h_upper = -std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 1; n <= N; ++n) {
    acc += dv[vs.index[n - 1]];
    if (n >= window_lo) {
      double h = -acc / static_cast<double>(n);
      r.h_lower = std::min(r.h_lower, h);
      r.h_upper = std::max(r.h_upper, h);
    }
  }
  return r;
}

/// The two computable sides of the dimension estimate at q: the window-min of
/// -q tau_n'(q) + tau_n(q), and the Legendre values at the grid's one-sided
/// slopes. The level-set dimension itself is not representable.
struct BoundsReport {
  double q = 0;
  double lower = 0;        // min over window of -q tau_n'(q) + tau_n(q)
  double upper_right = 0;  // tau*(-tau'(q+))
  double upper_left = 0;   // tau*(-tau'(q-))
  std::uint64_t horizon = 0;
  std::uint64_t window_lo = 0;
  double grid_step = 0;  // bounds the slope error of the upper pair
};

inline double legendre_value_at(const TauGrid& tau, double alpha) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tau.q.size(); ++i)
    best = std::min(best, alpha * tau.q[i] + tau.tau[i]);
  return best;
}

inline BoundsReport dimension_bounds(const WeightSequence& seq, double q,
                                    std::uint64_t N, std::uint64_t window_lo,
                                    const TauGrid& tau) {
  if (N < 2) throw std::invalid_argument("horizon must be >= 2");
  if (window_lo == 0) window_lo = std::max<std::uint64_t>(1, N / 2);
  if (tau.q.size() < 3 || q <= tau.q.front() || q >= tau.q.back())
    throw std::invalid_argument("q must lie in the interior of the tau grid");

  ValueStream vs = value_stream(seq, N);
  std::vector<double> tv(vs.values.size()), dv(vs.values.size());
  for (std::size_t v = 0; v < vs.values.size(); ++v) {
    tv[v] = tau_single(vs.values[v], q);
    dv[v] = tau_derivative(vs.values[v], q);
  }
  double at = 0, ad = 0;
  double lower = std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 1; n <= N; ++n) {
    at += tv[vs.index[n - 1]];
    ad += dv[vs.index[n - 1]];
    if (n >= window_lo) {
      double nn = static_cast<double>(n);
      lower = std::min(lower, -q * (ad / nn) + at / nn);
    }
  }

  // nearest grid point to q for the one-sided slopes
  std::size_t i = static_cast<std::size_t>(
      std::lower_bound(tau.q.begin(), tau.q.end(), q) - tau.q.begin());
  if (i > 0 && (i == tau.q.size() || tau.q[i] - q > q - tau.q[i - 1])) --i;

  BoundsReport r;
  r.q = q;
  r.lower = lower;
  r.upper_right = legendre_value_at(tau, -tau.slope_right[i]);
  r.upper_left = legendre_value_at(tau, -tau.slope_left[i]);
  r.horizon = N;
  r.window_lo = window_lo;
  r.grid_step = tau.step_hint();
  return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo local dimensions

struct HistogramBin {
  double lo = 0, hi = 0;
  std::uint64_t count = 0;
};

struct SampleStats {
  double mean = 0;
  double stddev = 0;
  std::vector<HistogramBin> histogram;
  std::uint64_t depth = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Draws `trials` depth-n paths from `sampler` and evaluates
/// alpha_n(x) = -log2 measure(I_n(x)) / n for each. Per-trial seeds derive
/// from the master seed, so the aggregate is order-independent.
inline SampleStats local_dimension_sample(const WeightSequence& measure,
                                          const WeightSequence& sampler,
                                          std::size_t depth, std::size_t trials,
                                          std::uint64_t seed,
                                          std::size_t histogram_bins = 40) {
  if (depth < 1 || trials < 1)
    throw std::invalid_argument("need depth >= 1 and trials >= 1");
  std::vector<double> ps = sampler.prefix(depth);
  std::vector<double> log2p(depth), log2r(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    double m = measure.weight_at(j + 1);
    log2p[j] = std::log2(m);
    log2r[j] = std::log2(1.0 - m);
  }
  std::vector<double> alphas(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    double acc = 0;
    for (std::size_t j = 0; j < depth; ++j)
      acc += uniform01(rng) < ps[j] ? log2p[j] : log2r[j];
    alphas[t] = -acc / static_cast<double>(depth);
  }
  SampleStats st;
  st.depth = depth;
  st.trials = trials;
  st.seed = seed;
  double sum = 0;
  for (double a : alphas) sum += a;
  st.mean = sum / static_cast<double>(trials);
  double ss = 0;
  for (double a : alphas) ss += (a - st.mean) * (a - st.mean);
  st.stddev = trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1)) : 0.0;

  double lo = *std::min_element(alphas.begin(), alphas.end());
  double hi = *std::max_element(alphas.begin(), alphas.end());
  if (hi <= lo) hi = lo + 1e-12;
  double w = (hi - lo) / static_cast<double>(histogram_bins);
  st.histogram.resize(histogram_bins);
  for (std::size_t b = 0; b < histogram_bins; ++b) {
    st.histogram[b].lo = lo + w * static_cast<double>(b);
    st.histogram[b].hi = lo + w * static_cast<double>(b + 1);
  }
  for (double a : alphas) {
    std::size_t b = static_cast<std::size_t>((a - lo) / w);
    if (b >= histogram_bins) b = histogram_bins - 1;
    ++st.histogram[b].count;
  }
  return st;
}

}  // namespace ibp
