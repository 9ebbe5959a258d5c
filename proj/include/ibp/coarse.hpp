#pragma once

// Exact coarse-grained singularity spectra at finite depth: the number of
// depth-n cylinders with alpha_n(x) in each bin, counted exactly with
// arbitrary-precision integers, and the comparison against the Legendre
// transform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ibp/errors.hpp"
#include "ibp/spectrum.hpp"
#include "ibp/weights.hpp"

namespace ibp {

using BigInt = boost::multiprecision::cpp_int;

struct CoarseBin {
  double lo = 0, hi = 0;
  BigInt count;  // exact number of depth-n cylinders with alpha_n in [lo, hi)
  double f = 0;  // log2(count)/n, NaN for empty bins
  BigInt spill;  // cylinders within discretization tolerance of a boundary
};

struct CoarseSpectrum {
  std::size_t depth = 0;
  std::vector<CoarseBin> bins;

  BigInt total() const {
    BigInt t = 0;
    for (const CoarseBin& b : bins) t += b.count;
    return t;
  }
};

struct CoarseOptions {
  // exact enumeration while prod(m_v + 1) stays below this; DP fallback after
  std::uint64_t enum_limit = 10'000'000;
  double dp_resolution = 1e-4;  // log2-measure grid of the fallback
};

/// Attainable [alpha_min, alpha_max] of alpha_n over depth-n cylinders.
inline std::pair<double, double> attainable_alpha_range(const ValueStream& vs) {
  double lo = 0, hi = 0;
  double n = static_cast<double>(vs.index.size());
  for (std::size_t v = 0; v < vs.values.size(); ++v) {
    double a = -std::log2(vs.values[v]);
    double b = -std::log2(1.0 - vs.values[v]);
    lo += static_cast<double>(vs.counts[v]) * std::min(a, b);
    hi += static_cast<double>(vs.counts[v]) * std::max(a, b);
  }
  return {lo / n, hi / n};
}

/// Default bin edges: width-w cover of [0, ceil(alpha_max)].
inline std::vector<double> default_alpha_edges(const WeightSequence& seq,
                                               std::size_t n, double width = 0.01) {
  double amax = 0;
  for (std::uint64_t j = 1; j <= n; ++j) {
    double p = seq.weight_at(j);
    amax = std::max(amax, -std::log2(std::min(p, 1.0 - p)));
  }
  return make_grid(0.0, std::ceil(amax), width);
}

namespace detail {

inline std::size_t bin_of(const std::vector<double>& edges, double alpha) {
  // bin i covers [edges[i], edges[i+1]); the last bin is closed above
  auto it = std::upper_bound(edges.begin(), edges.end(), alpha);
  if (it == edges.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - edges.begin()) - 1;
  if (i + 1 >= edges.size()) i = edges.size() - 2;
  return i;
}

inline std::vector<std::vector<BigInt>> binomial_rows(
    const std::vector<std::uint64_t>& ms) {
  std::vector<std::vector<BigInt>> rows;
  rows.reserve(ms.size());
  for (std::uint64_t m : ms) {
    std::vector<BigInt> row(m + 1);
    row[0] = 1;
    for (std::uint64_t k = 1; k <= m; ++k)
      row[k] = row[k - 1] * BigInt(m - k + 1) / BigInt(k);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Exact per-bin counts of depth-n cylinders by alpha_n. Levels are grouped
/// by distinct weight value; a cylinder's log-measure depends only on the
/// per-value 1-bit counts (k_1,...,k_d), with multiplicity prod C(m_v, k_v).
/// When the count-vector space is too large, falls back to a discretized
/// convolution DP with per-bin spill reporting.
inline CoarseSpectrum coarse_spectrum(const WeightSequence& seq, std::size_t n,
                                      const std::vector<double>& edges,
                                      const CoarseOptions& opts = {}) {
  if (n < 1) throw std::invalid_argument("depth must be >= 1");
  if (edges.size() < 2) throw std::invalid_argument("need at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw std::invalid_argument("bin edges must be strictly increasing");

  ValueStream vs = value_stream(seq, n);
  auto [amin, amax] = attainable_alpha_range(vs);
  if (edges.front() > amin + 1e-12 || edges.back() < amax - 1e-12) {
    std::ostringstream os;
    os << "bins do not cover the attainable alpha range [" << amin << ", " << amax
       << "]";
    throw CoverageError(os.str(), amin, amax);
  }

  CoarseSpectrum cs;
  cs.depth = n;
  cs.bins.resize(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    cs.bins[i].lo = edges[i];
    cs.bins[i].hi = edges[i + 1];
    cs.bins[i].count = 0;
    cs.bins[i].spill = 0;
  }

  std::size_t d = vs.values.size();
  std::vector<double> l0(d), l1(d);  // log2 p_v, log2 (1-p_v)
  for (std::size_t v = 0; v < d; ++v) {
    l0[v] = std::log2(vs.values[v]);
    l1[v] = std::log2(1.0 - vs.values[v]);
  }

  double states = 1;
  for (std::uint64_t m : vs.counts) states *= static_cast<double>(m + 1);

  if (states <= static_cast<double>(opts.enum_limit)) {
    auto rows = detail::binomial_rows(vs.counts);
    std::vector<std::uint64_t> k(d, 0);
    for (;;) {
      double logm = 0;
      BigInt mult = 1;
      for (std::size_t v = 0; v < d; ++v) {
        logm += static_cast<double>(k[v]) * l1[v] +
                static_cast<double>(vs.counts[v] - k[v]) * l0[v];
        mult *= rows[v][k[v]];
      }
      double alpha = -logm / static_cast<double>(n);
      cs.bins[detail::bin_of(edges, alpha)].count += mult;
      // odometer
      std::size_t v = 0;
      while (v < d && k[v] == vs.counts[v]) k[v++] = 0;
      if (v == d) break;
      ++k[v];
    }
    return cs;
  }

  // DP fallback on a discretized -log2-measure axis. Each level's increment
  // is rounded to the grid; the accumulated rounding stays below res/2 per
  // level, so cylinders within `res` (in alpha) of a bin edge are reported
  // as spill.
  double res = opts.dp_resolution;
  double max_inc = 0;
  for (std::size_t v = 0; v < d; ++v)
    max_inc = std::max(max_inc, std::max(-l0[v], -l1[v]));
  std::size_t cells =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n) * max_inc / res)) + 2;
  std::vector<BigInt> dp(cells), next(cells);
  dp[0] = 1;
  std::size_t hi_cell = 0;
  for (std::size_t lvl = 0; lvl < n; ++lvl) {
    std::size_t v = vs.index[lvl];
    std::size_t s0 = static_cast<std::size_t>(std::llround(-l0[v] / res));
    std::size_t s1 = static_cast<std::size_t>(std::llround(-l1[v] / res));
    std::size_t new_hi = hi_cell + std::max(s0, s1);
    for (std::size_t c = 0; c <= new_hi && c < cells; ++c) next[c] = 0;
    for (std::size_t c = 0; c <= hi_cell; ++c) {
      if (dp[c] == 0) continue;
      next[c + s0] += dp[c];
      next[c + s1] += dp[c];
    }
    dp.swap(next);
    hi_cell = std::min(new_hi, cells - 1);
  }
  double alpha_tol = res;  // certified ambiguity band around bin edges
  for (std::size_t c = 0; c <= hi_cell; ++c) {
    if (dp[c] == 0) continue;
    double alpha = static_cast<double>(c) * res / static_cast<double>(n);
    std::size_t b = detail::bin_of(edges, alpha);
    cs.bins[b].count += dp[c];
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (std::abs(alpha - edges[e]) <= alpha_tol) {
        if (e > 0) cs.bins[e - 1].spill += dp[c];
        if (e + 1 < edges.size()) cs.bins[e].spill += dp[c];
      }
    }
  }
  return cs;
}

/// Fills in f = log2(count)/n.
inline void finalize_f(CoarseSpectrum& cs) {
  for (CoarseBin& b : cs.bins) {
    if (b.count > 0) {
      double c = b.count.convert_to<double>();
      b.f = std::log2(c) / static_cast<double>(cs.depth);
    } else {
      b.f = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

inline CoarseSpectrum coarse_spectrum_with_f(const WeightSequence& seq,
                                             std::size_t n,
                                             const std::vector<double>& edges,
                                             const CoarseOptions& opts = {}) {
  CoarseSpectrum cs = coarse_spectrum(seq, n, edges, opts);
  finalize_f(cs);
  return cs;
}

// ---------------------------------------------------------------------------
// Comparison with the Legendre transform

struct FormalismGap {
  double sup_f_minus_tau_star = 0;  // should be <= log2(n+1)/n + grid slack
  double sup_tau_star_minus_f = 0;
};

/// One-sided sup deviations between f_n over occupied bins and the
/// interpolated tau*. A bin's cylinders can sit anywhere in [lo, hi], so the
/// upper direction compares f against the best tau* within the bin; the lower
/// direction uses the midpoint.
inline FormalismGap formalism_gap(const CoarseSpectrum& cs, const LegendreGrid& lg) {
  FormalismGap g{-std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  bool any = false;
  for (const CoarseBin& b : cs.bins) {
    if (b.count == 0) continue;
    double mid = 0.5 * (b.lo + b.hi);
    double ts_mid = legendre_interp(lg, mid);
    double ts_max = -std::numeric_limits<double>::infinity();
    for (double a : {b.lo, mid, b.hi}) {
      double t = legendre_interp(lg, a);
      if (!std::isnan(t)) ts_max = std::max(ts_max, t);
    }
    if (std::isinf(ts_max)) continue;
    double f = b.count.convert_to<double>();
    double fn = std::log2(f) / static_cast<double>(cs.depth);
    g.sup_f_minus_tau_star = std::max(g.sup_f_minus_tau_star, fn - ts_max);
    if (!std::isnan(ts_mid))
      g.sup_tau_star_minus_f = std::max(g.sup_tau_star_minus_f, ts_mid - fn);
    any = true;
  }
  if (!any)
    throw std::invalid_argument("coarse spectrum and Legendre grid do not overlap");
  return g;
}

}  // namespace ibp
