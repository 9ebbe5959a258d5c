#pragma once

// Weight sequences (p_n) on the dyadic tree and exact log-space cylinder
// measures. All sequence types are immutable after construction and safe to
// share across threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibp/errors.hpp"

namespace ibp {

// ---------------------------------------------------------------------------
// Block schedules (l_k)

class BlockSchedule {
 public:
  enum class Rule { Factorial, Geometric, Explicit };

  BlockSchedule() = default;

  // l_k = k!
  static BlockSchedule factorial() {
    BlockSchedule s;
    s.rule_ = Rule::Factorial;
    std::uint64_t len = 1;
    for (std::uint64_t k = 1;; ++k) {
      len = (k == 1) ? 1 : len * k;
      if (!s.push_len(len)) break;
    }
    return s;
  }

  // l_k = c * r^k, integer c >= 1, r >= 2
  static BlockSchedule geometric(std::uint64_t c, std::uint64_t r) {
    if (c < 1 || r < 2) throw ConfigError("geometric schedule needs c >= 1, r >= 2");
    BlockSchedule s;
    s.rule_ = Rule::Geometric;
    s.c_ = c;
    s.r_ = r;
    std::uint64_t len = c;
    for (;;) {
      if (len > kMaxTotal / r) break;
      len *= r;
      if (!s.push_len(len)) break;
    }
    return s;
  }

  static BlockSchedule explicit_lengths(std::vector<std::uint64_t> lens) {
    if (lens.empty()) throw ConfigError("explicit schedule needs at least one block");
    BlockSchedule s;
    s.rule_ = Rule::Explicit;
    s.lens_ = lens;
    for (std::uint64_t len : lens) {
      if (len < 1) throw ConfigError("block lengths must be >= 1");
      if (!s.push_len(len)) throw ConfigError("explicit schedule overflows");
    }
    return s;
  }

  Rule rule() const { return rule_; }
  std::uint64_t geometric_c() const { return c_; }
  std::uint64_t geometric_r() const { return r_; }
  const std::vector<std::uint64_t>& explicit_lens() const { return lens_; }

  std::size_t known_blocks() const { return cum_.size(); }

  // L_k = l_1 + ... + l_k, with L_0 = 0.
  std::uint64_t boundary(std::size_t k) const {
    if (k == 0) return 0;
    if (k > cum_.size()) throw std::out_of_range("schedule boundary out of range");
    return cum_[k - 1];
  }

  std::uint64_t block_length(std::size_t k) const {
    return boundary(k) - boundary(k - 1);
  }

  // 1-based block index containing level j; blocks partition the levels.
  std::size_t block_of_level(std::uint64_t j) const {
    if (j < 1) throw std::out_of_range("levels are 1-based");
    auto it = std::lower_bound(cum_.begin(), cum_.end(), j);
    if (it == cum_.end())
      throw std::out_of_range("level " + std::to_string(j) + " beyond schedule");
    return static_cast<std::size_t>(it - cum_.begin()) + 1;
  }

  std::uint64_t max_level() const { return cum_.empty() ? 0 : cum_.back(); }

 private:
  static constexpr std::uint64_t kMaxTotal = std::uint64_t(1) << 62;

  bool push_len(std::uint64_t len) {
    std::uint64_t prev = cum_.empty() ? 0 : cum_.back();
    if (len > kMaxTotal - prev) return false;
    cum_.push_back(prev + len);
    return true;
  }

  Rule rule_ = Rule::Factorial;
  std::uint64_t c_ = 1, r_ = 2;
  std::vector<std::uint64_t> lens_;
  std::vector<std::uint64_t> cum_;
};

// ---------------------------------------------------------------------------
// Cylinders

struct Cylinder {
  std::vector<std::uint8_t> bits;  // each 0 or 1, root = empty

  std::size_t depth() const { return bits.size(); }

  static Cylinder from_string(const std::string& s) {
    Cylinder c;
    c.bits.reserve(s.size());
    for (char ch : s) {
      if (ch != '0' && ch != '1') throw ConfigError("cylinder bits must be 0/1");
      c.bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    return c;
  }

  Cylinder child(std::uint8_t bit) const {
    Cylinder c = *this;
    c.bits.push_back(bit);
    return c;
  }
};

// ---------------------------------------------------------------------------
// Weight sequences

enum class WeightKind {
  Constant,
  Periodic,
  Explicit,
  LowDiscrepancy,
  BlockInterleaved,
  Diagonal,
  Gibbs,
};

class WeightSequence {
 public:
  struct Term {
    double lambda;
    double p;
  };

  static WeightSequence constant(double p) {
    check_weight(p);
    auto n = std::make_shared<Node>();
    n->kind = WeightKind::Constant;
    n->values = {p};
    return WeightSequence(std::move(n));
  }

  static WeightSequence periodic(std::vector<double> ps) {
    if (ps.empty()) throw ConfigError("periodic sequence needs at least one weight");
    for (double p : ps) check_weight(p);
    auto n = std::make_shared<Node>();
    n->kind = WeightKind::Periodic;
    n->values = std::move(ps);
    return WeightSequence(std::move(n));
  }

  static WeightSequence explicit_list(std::vector<double> ps) {
    if (ps.empty()) throw ConfigError("explicit sequence needs at least one weight");
    for (double p : ps) check_weight(p);
    auto n = std::make_shared<Node>();
    n->kind = WeightKind::Explicit;
    n->values = std::move(ps);
    return WeightSequence(std::move(n));
  }

  // Greedy low-discrepancy realization of a list of (lambda_i, p_i): level n
  // gets the component maximizing lambda_i * n - count_i(n-1), ties to the
  // smallest index. Keeps |count_i(n) - lambda_i n| <= #components for all n.
  static WeightSequence low_discrepancy(std::vector<Term> terms) {
    if (terms.empty()) throw ConfigError("low-discrepancy sequence needs terms");
    double sum = 0;
    for (const Term& t : terms) {
      check_weight(t.p);
      if (!(t.lambda > 0 && t.lambda < 1 + 1e-12))
        throw ConfigError("term weights must lie in (0,1]");
      sum += t.lambda;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("term weights must sum to 1");
    auto n = std::make_shared<Node>();
    n->kind = WeightKind::LowDiscrepancy;
    n->terms = std::move(terms);
    n->counts.assign(n->terms.size(), 0);
    return WeightSequence(std::move(n));
  }

  // Level j in schedule block k resolves to component ((k-1) mod m) + 1,
  // which contributes its own weight at the same absolute index j.
  static WeightSequence block_interleaved(std::vector<WeightSequence> components,
                                          BlockSchedule schedule) {
    if (components.empty()) throw ConfigError("interleave needs components");
    auto n = std::make_shared<Node>();
    n->kind = WeightKind::BlockInterleaved;
    n->children = std::move(components);
    n->schedule = std::move(schedule);
    return WeightSequence(std::move(n));
  }

  // Stage k governs the levels of schedule block k (aligned absolute
  // indexing); blocks beyond the last stage keep using the last stage.
  static WeightSequence diagonal(std::vector<WeightSequence> stages,
                                 BlockSchedule schedule) {
    if (stages.empty()) throw ConfigError("diagonal composition needs stages");
    auto n = std::make_shared<Node>();
    n->kind = WeightKind::Diagonal;
    n->children = std::move(stages);
    n->schedule = std::move(schedule);
    return WeightSequence(std::move(n));
  }

  // q-lift p -> p^q / (p^q + (1-p)^q), applied level by level. q = 1 returns
  // the base unchanged and q = 0 the uniform sequence, both exactly.
  static WeightSequence gibbs(WeightSequence base, double q) {
    if (q == 1.0) return base;
    if (q == 0.0) return constant(0.5);
    auto n = std::make_shared<Node>();
    n->kind = WeightKind::Gibbs;
    n->children = {std::move(base)};
    n->q = q;
    return WeightSequence(std::move(n));
  }

  WeightKind kind() const { return node_->kind; }
  const std::vector<double>& values() const { return node_->values; }
  const std::vector<Term>& terms() const { return node_->terms; }
  const std::vector<WeightSequence>& children() const { return node_->children; }
  const BlockSchedule& schedule() const { return node_->schedule; }
  double gibbs_q() const { return node_->q; }

  /// Weight p_j, levels are 1-based. Pure in (sequence, j).
  double weight_at(std::uint64_t j) const {
    if (j < 1) throw std::out_of_range("levels are 1-based");
    const Node& n = *node_;
    switch (n.kind) {
      case WeightKind::Constant:
        return n.values[0];
      case WeightKind::Periodic:
        return n.values[(j - 1) % n.values.size()];
      case WeightKind::Explicit:
        if (j > n.values.size())
          throw std::out_of_range("level " + std::to_string(j) +
                                  " beyond explicit weight list");
        return n.values[j - 1];
      case WeightKind::LowDiscrepancy:
        return n.terms[n.component_at(j)].p;
      case WeightKind::BlockInterleaved: {
        std::size_t k = n.schedule.block_of_level(j);
        const WeightSequence& c = n.children[(k - 1) % n.children.size()];
        return c.weight_at(j);
      }
      case WeightKind::Diagonal: {
        std::size_t k = n.schedule.block_of_level(j);
        std::size_t s = std::min(k, n.children.size());
        return n.children[s - 1].weight_at(j);
      }
      case WeightKind::Gibbs:
        return gibbs_weight(n.children[0].weight_at(j), n.q);
    }
    throw std::logic_error("unreachable");
  }

  /// First n weights, materialized.
  std::vector<double> prefix(std::size_t n) const {
    std::vector<double> out;
    out.reserve(n);
    for (std::uint64_t j = 1; j <= n; ++j) out.push_back(weight_at(j));
    return out;
  }

  static double gibbs_weight(double p, double q) {
    double a = std::pow(p, q);
    double b = std::pow(1.0 - p, q);
    double s = a + b;
    if (std::isfinite(s) && s > 0 && a / s > 0 && a / s < 1) return a / s;
    // overflow/underflow fallback: 1 / (1 + ((1-p)/p)^q)
    double t = q * (std::log1p(-p) - std::log(p));
    if (t > 700) return std::numeric_limits<double>::min();
    double w = 1.0 / (1.0 + std::exp(t));
    if (w <= 0) w = std::numeric_limits<double>::min();
    if (w >= 1) w = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return w;
  }

 private:
  struct Node {
    WeightKind kind = WeightKind::Constant;
    std::vector<double> values;
    std::vector<Term> terms;
    std::vector<WeightSequence> children;
    BlockSchedule schedule;
    double q = 1.0;

    // low-discrepancy assignment memo, grown on demand
    mutable std::mutex mu;
    mutable std::vector<std::uint8_t> assign;
    mutable std::vector<std::uint64_t> counts;

    std::size_t component_at(std::uint64_t j) const {
      std::lock_guard<std::mutex> lock(mu);
      while (assign.size() < j) {
        std::uint64_t lvl = assign.size() + 1;
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < terms.size(); ++i) {
          double score = terms[i].lambda * static_cast<double>(lvl) -
                         static_cast<double>(counts[i]);
          if (score > best_score) {
            best_score = score;
            best = i;
          }
        }
        assign.push_back(static_cast<std::uint8_t>(best));
        ++counts[best];
      }
      return assign[j - 1];
    }
  };

  explicit WeightSequence(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static void check_weight(double p) {
    if (!(p > 0.0 && p < 1.0))
      throw ConfigError("weights must lie strictly in (0,1)");
  }

  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Cylinder measures and sampling

/// log2 mu(c) = sum_j [e_j=0] log2 p_j + [e_j=1] log2(1-p_j). Empty cylinder
/// is the root with measure 1.
inline double cylinder_measure(const WeightSequence& seq, const Cylinder& c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c.bits.size(); ++i) {
    double p = seq.weight_at(i + 1);
    acc += c.bits[i] == 0 ? std::log2(p) : std::log2(1.0 - p);
  }
  return acc;
}

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Draws a depth-n path, emitting bit 0 with probability p_j at level j.
inline Cylinder sample_path(const WeightSequence& seq, std::size_t depth,
                            std::mt19937_64& rng) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  Cylinder c;
  c.bits.reserve(depth);
  for (std::size_t j = 1; j <= depth; ++j) {
    double p = seq.weight_at(j);
    c.bits.push_back(uniform01(rng) < p ? 0 : 1);
  }
  return c;
}

/// Per-trial generator derived from a master seed; trials are independent
/// and order-free.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace ibp
