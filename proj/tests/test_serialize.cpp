#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "ibp/serialize.hpp"

using namespace ibp;

namespace {

void check_same_prefix(const WeightSequence& a, const WeightSequence& b,
                       std::uint64_t n) {
  for (std::uint64_t j = 1; j <= n; ++j) CHECK(a.weight_at(j) == b.weight_at(j));
}

}  // namespace

TEST_CASE("weight sequences round-trip through json") {
  std::vector<std::pair<WeightSequence, std::uint64_t>> seqs = {
      {WeightSequence::constant(0.25), 17},
      {WeightSequence::periodic({0.2, 0.4, 0.35}), 17},
      {WeightSequence::explicit_list({0.1, 0.2, 0.3, 0.4}), 4},
      {WeightSequence::low_discrepancy({{0.7, 0.2}, {0.3, 0.45}}), 17},
      {WeightSequence::block_interleaved(
           {WeightSequence::constant(0.2), WeightSequence::periodic({0.3, 0.4})},
           BlockSchedule::geometric(2, 3)),
       17},
      {WeightSequence::diagonal(
           {WeightSequence::constant(0.2), WeightSequence::constant(0.3)},
           BlockSchedule::explicit_lengths({3, 5, 9})),
       17},
      {WeightSequence::gibbs(WeightSequence::periodic({0.2, 0.4}), 2.5), 17},
  };
  for (const auto& [s, n] : seqs) {
    json j = weight_sequence_to_json(s);
    // through a string, as the CLI does
    json back = json::parse(j.dump());
    WeightSequence r = weight_sequence_from_json(back);
    CHECK(r.kind() == s.kind());
    check_same_prefix(s, r, n);
  }
}

TEST_CASE("schedules round-trip through json") {
  for (const auto& s :
       {BlockSchedule::factorial(), BlockSchedule::geometric(1, 20),
        BlockSchedule::explicit_lengths({1, 1, 4, 16})}) {
    BlockSchedule r = schedule_from_json(json::parse(schedule_to_json(s).dump()));
    CHECK(r.rule() == s.rule());
    for (std::size_t k = 1; k <= std::min<std::size_t>(s.known_blocks(), 6); ++k)
      CHECK(r.boundary(k) == s.boundary(k));
  }
}

TEST_CASE("combos round-trip through json") {
  ConvexCombo c({{0.5, 0.1}, {0.5, 0.4}});
  ConvexCombo r = combo_from_json(json::parse(combo_to_json(c).dump()));
  REQUIRE(r.terms().size() == c.terms().size());
  for (std::size_t i = 0; i < c.terms().size(); ++i) {
    CHECK(r.terms()[i].lambda == c.terms()[i].lambda);
    CHECK(r.terms()[i].p == c.terms()[i].p);
  }
}

TEST_CASE("unknown and malformed keys are rejected") {
  CHECK_THROWS_AS(weight_sequence_from_json(json{{"kind", "constant"},
                                                 {"p", 0.25},
                                                 {"extra", 1}}),
                  ConfigError);
  CHECK_THROWS_AS(weight_sequence_from_json(json{{"kind", "constant"}}), ConfigError);
  CHECK_THROWS_AS(weight_sequence_from_json(json{{"kind", "nope"}, {"p", 0.2}}),
                  ConfigError);
  CHECK_THROWS_AS(weight_sequence_from_json(json{{"kind", "periodic"},
                                                 {"weights", "abc"}}),
                  ConfigError);
  CHECK_THROWS_AS(schedule_from_json(json{{"rule", "geometric"}, {"c", 1}}),
                  ConfigError);
  CHECK_THROWS_AS(schedule_from_json(json{{"rule", "factorial"}, {"x", 1}}),
                  ConfigError);
  CHECK_THROWS_AS(combo_from_json(json{{"terms", {{0.5, 0.1}}}, {"junk", 0}}),
                  ConfigError);
  // out-of-range payloads surface the library's own validation
  CHECK_THROWS_AS(weight_sequence_from_json(json{{"kind", "constant"}, {"p", 1.5}}),
                  ConfigError);
}

TEST_CASE("doubles are written with full round-trip precision") {
  double x = 0.1 + 0.2;
  CHECK(fmt_double(x) == "0.30000000000000004");
  CHECK(fmt_double(1.0) == "1");
  CHECK(fmt_double(-2.5) == "-2.5");
}

TEST_CASE("tau csv layout") {
  auto grid = tau_grid_from_function([](double q) { return 1.0 - q; },
                                     make_grid(0.0, 1.0, 0.5));
  std::ostringstream os;
  write_tau_csv(os, grid);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "q,tau,slope_left,slope_right,source_n");
  std::getline(is, line);
  CHECK(line == "0,1,-1,-1,0");
  std::getline(is, line);
  CHECK(line == "0.5,0.5,-1,-1,0");
  std::getline(is, line);
  CHECK(line == "1,0,-1,-1,0");
  CHECK(!std::getline(is, line));
}

TEST_CASE("legendre and coarse csv layouts") {
  LegendreGrid lg;
  lg.alpha = {0.5};
  lg.tau_star = {0.25};
  lg.argmin_q = {2.0};
  lg.flag = {1};
  std::ostringstream os;
  write_legendre_csv(os, lg);
  CHECK(os.str() == "alpha,tau_star,argmin_q,boundary_flag\n0.5,0.25,2,1\n");

  auto cs = coarse_spectrum_with_f(WeightSequence::constant(0.5), 4, {0.5, 1.5});
  std::ostringstream oc;
  write_coarse_csv(oc, cs);
  CHECK(oc.str() == "alpha_low,alpha_high,count,f_value,spill_count\n"
                    "0.5,1.5,16,1,0\n");
}

TEST_CASE("huge exact counts serialize in full decimal") {
  CoarseSpectrum cs;
  cs.depth = 400;
  CoarseBin b;
  b.lo = 0.0;
  b.hi = 1.0;
  b.count = BigInt(1) << 400;  // far beyond any double
  b.f = 1.0;
  b.spill = 0;
  cs.bins.push_back(b);
  std::ostringstream os;
  write_coarse_csv(os, cs);
  CHECK(os.str().find((BigInt(1) << 400).str()) != std::string::npos);
}

TEST_CASE("dense build manifest rebuilds the same sequence") {
  ConvexCombo base({{0.5, 0.1}, {0.5, 0.4}});
  auto build = dense_transition_build(NestedDenseSequence({2.0, 3.0}), base, 1,
                                      BlockSchedule::factorial());
  json j = dense_build_to_json(build);
  WeightSequence rebuilt =
      weight_sequence_from_json(json::parse(j.dump()).at("sequence"));
  check_same_prefix(build.sequence, rebuilt, 200);
  CHECK(j.at("stages").size() == 1);
  CHECK(j.at("stages")[0].at("perturbed_from") == 0);
}
