#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ihsim/fuzzy.hpp"
#include "test_support.hpp"

using namespace ihsim;

TEST_CASE("membership: triangular core") {
  FuzzySet z{"Z", 0.0, 0.5, Shoulder::none};
  CHECK(membership(z, 0.0) == 1.0);
  CHECK(membership(z, 0.25) == 0.5);
  CHECK(membership(z, 0.5) == 0.0);
  CHECK(membership(z, -0.6) == 0.0);
}

TEST_CASE("membership: shoulder saturation") {
  FuzzySet pl{"PL", 1.0, 0.25, Shoulder::right};
  CHECK(membership(pl, 1.0) == 1.0);
  CHECK(membership(pl, 2.0) == 1.0);
  CHECK(membership(pl, 0.875) == Catch::Approx(0.5));
  FuzzySet nl{"NL", -1.0, 0.5, Shoulder::left};
  CHECK(membership(nl, -1.5) == 1.0);
  CHECK(membership(nl, -0.75) == Catch::Approx(0.5));
}

TEST_CASE("fuzzify: 5-set partition") {
  const auto p = FuzzyPartition::uniform(kLabels5);
  const auto at_zero = fuzzify(p, 0.0);
  CHECK(at_zero == std::vector<double>{0, 0, 1, 0, 0});

  const auto mid = fuzzify(p, -0.75);
  CHECK(mid[0] == Catch::Approx(0.5));
  CHECK(mid[1] == Catch::Approx(0.5));
  CHECK(mid[2] == 0.0);
}

TEST_CASE("fuzzify: 9-set shoulder and clamping") {
  const auto p = FuzzyPartition::uniform(kLabels9);
  const auto deg = fuzzify(p, 1.0);
  CHECK(deg.back() == 1.0);
  for (size_t i = 0; i + 1 < deg.size(); ++i) CHECK(deg[i] == 0.0);
  // out-of-range input clamps, it does not extrapolate
  CHECK(fuzzify(p, 37.0) == deg);
}

TEST_CASE("fuzzify: at most two nonzero, partition of unity") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const int n : {5, 9}) {
    const auto p = n == 5 ? FuzzyPartition::uniform(kLabels5)
                          : FuzzyPartition::uniform(kLabels9);
    for (int trial = 0; trial < 500; ++trial) {
      const auto deg = fuzzify(p, dist(rng));
      int nonzero = 0;
      double sum = 0.0;
      for (double d : deg) {
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        if (d > 0.0) ++nonzero;
        sum += d;
      }
      CHECK(nonzero <= 2);
      CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("infer: one-hot pairs reproduce the rule grids exactly") {
  const auto& res = resonance5();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      std::vector<double> a(5, 0.0), b(5, 0.0);
      a[i] = 1.0;
      b[j] = 1.0;
      const auto fired = infer(res.rules, a, b);
      REQUIRE(fired.size() == 1);
      CHECK(fired[0].label == oracle::resonance_cell(i, j));
      CHECK(fired[0].degree == 1.0);
    }
  }
  const auto& pow = power9();
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      std::vector<double> a(9, 0.0), b(9, 0.0);
      a[i] = 1.0;
      b[j] = 1.0;
      const auto fired = infer(pow.rules, a, b);
      REQUIRE(fired.size() == 1);
      CHECK(fired[0].label == oracle::power_cell(i, j));
    }
  }
}

TEST_CASE("infer: corner cells") {
  // row NL col NL -> PL; center -> Z; 9-set row PVL col NVL -> Z
  const auto& res = resonance5();
  std::vector<double> a(5, 0.0), b(5, 0.0);
  a[0] = b[0] = 1.0;
  auto fired = infer(res.rules, a, b);
  REQUIRE(fired.size() == 1);
  CHECK(res.output.sets[fired[0].label].label == "PL");

  std::vector<double> az(5, 0.0), bz(5, 0.0);
  az[2] = bz[2] = 1.0;
  fired = infer(res.rules, az, bz);
  REQUIRE(fired.size() == 1);
  CHECK(res.output.sets[fired[0].label].label == "Z");

  const auto& pow = power9();
  std::vector<double> ap(9, 0.0), bp(9, 0.0);
  ap[8] = 1.0;
  bp[0] = 1.0;
  fired = infer(pow.rules, ap, bp);
  REQUIRE(fired.size() == 1);
  CHECK(pow.output.sets[fired[0].label].label == "Z");
}

TEST_CASE("infer: at most four rules fire for interior inputs") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-0.99, 0.99);
  const auto& ctl = power9();
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = fuzzify(ctl.input_error, dist(rng));
    const auto b = fuzzify(ctl.input_delta, dist(rng));
    int fired_rules = 0;
    for (double da : a)
      for (double db : b)
        if (da > 0.0 && db > 0.0) ++fired_rules;
    CHECK(fired_rules <= 4);
  }
}

TEST_CASE("infer: dimension mismatch is a configuration error") {
  std::vector<double> five(5, 0.2), nine(9, 0.1);
  CHECK_THROWS_AS(infer(resonance5().rules, nine, five), ConfigError);
  CHECK_THROWS_AS(infer(power9().rules, five, nine), ConfigError);
}

TEST_CASE("defuzzify: symmetric singletons") {
  const auto& res = resonance5();
  const Activation z[] = {{2, 1.0}};
  CHECK(defuzzify_centroid(z, res.output).value == Catch::Approx(0.0).margin(1e-15));

  // PS alone is a symmetric interior triangle centered at 0.5
  const Activation ps[] = {{3, 1.0}};
  CHECK(defuzzify_centroid(ps, res.output).value == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("defuzzify: no rule fired flag") {
  const auto& res = resonance5();
  const auto out = defuzzify_centroid({}, res.output);
  CHECK(out.value == 0.0);
  CHECK(!out.fired);
  const Activation ps[] = {{3, 0.7}};
  CHECK(defuzzify_centroid(ps, res.output).fired);
}

TEST_CASE("defuzzify: mixed clip levels match the brute-force centroid") {
  const auto& res = resonance5();
  const Activation agg[] = {{3, 0.5}, {4, 0.5}};
  const std::pair<int, double> clips[] = {{3, 0.5}, {4, 0.5}};
  const double expect = oracle::brute_force_centroid(clips, 5);
  const double got = defuzzify_centroid(agg, res.output).value;
  CHECK(got == Catch::Approx(expect).margin(1e-4));
  CHECK(expect == Catch::Approx(0.55952).margin(5e-4));
}

TEST_CASE("controller_eval: reference points") {
  const auto& res = resonance5();
  CHECK(res.eval(0.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
  // e=-0.5, de=0 fires only (NS,Z) -> PS at full degree
  CHECK(res.eval(-0.5, 0.0) == Catch::Approx(0.5).margin(1e-12));

  const auto& pow = power9();
  const std::pair<int, double> clips[] = {{8, 1.0}};
  const double expect = oracle::brute_force_centroid(clips, 9);
  CHECK(pow.eval(1.0, 0.0) == Catch::Approx(expect).margin(1e-4));
  CHECK(expect == Catch::Approx(11.0 / 12.0).margin(1e-4));
}

TEST_CASE("controller_eval: production grid matches million-point oracle") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const auto* ctl : {&resonance5(), &power9()}) {
    const int n = ctl->output.size();
    for (int trial = 0; trial < 100; ++trial) {
      const double e = dist(rng), de = dist(rng);
      const auto fired =
          infer(ctl->rules, fuzzify(ctl->input_error, e), fuzzify(ctl->input_delta, de));
      std::vector<std::pair<int, double>> clips;
      for (const auto& a : fired) clips.emplace_back(a.label, a.degree);
      const double expect = oracle::brute_force_centroid(clips, n, 100001);
      CHECK(ctl->eval(e, de) == Catch::Approx(expect).margin(1e-4));
    }
  }
}

TEST_CASE("controller_eval: odd symmetry of both grids") {
  // cell(i,j) = -cell(n-1-i, n-1-j) under label negation
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(oracle::resonance_cell(i, j) == 4 - oracle::resonance_cell(4 - i, 4 - j));
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      CHECK(oracle::power_cell(i, j) == 8 - oracle::power_cell(8 - i, 8 - j));

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const auto* ctl : {&resonance5(), &power9()}) {
    for (int trial = 0; trial < 200; ++trial) {
      const double e = dist(rng), de = dist(rng);
      CHECK(ctl->eval(-e, -de) == Catch::Approx(-ctl->eval(e, de)).margin(1e-9));
    }
  }
}

TEST_CASE("controller_eval: output bounded and monotone in the error") {
  const auto& pow = power9();

  // label indices are non-decreasing along every row of the 9x9 grid
  for (int j = 0; j < 9; ++j)
    for (int i = 1; i < 9; ++i)
      CHECK(oracle::power_cell(i, j) >= oracle::power_cell(i - 1, j));

  // the crisp surface is exactly monotone on the set-center lattice, and
  // monotone within the centroid-of-max ripple (measured max 0.0073) between
  // centers where adjacent rules trade activation under a shared consequent
  for (int j = 0; j < 9; ++j) {
    double prev_u = -2.0;
    for (int i = 0; i < 9; ++i) {
      const double u = pow.eval(-1.0 + 0.25 * i, -1.0 + 0.25 * j);
      CHECK(u >= prev_u - 1e-12);
      prev_u = u;
    }
  }
  for (int jj = 0; jj <= 100; ++jj) {
    const double de = -1.0 + 0.02 * jj;
    double prev_u = -2.0;
    for (int ii = 0; ii <= 100; ++ii) {
      const double e = -1.0 + 0.02 * ii;
      const double u = pow.eval(e, de);
      CHECK(u >= -1.0);
      CHECK(u <= 1.0);
      CHECK(u >= prev_u - 0.01);
      prev_u = u;
    }
  }
}

TEST_CASE("controller_eval: corrective sign against the error") {
  const auto& res = resonance5();
  for (int k = 1; k <= 20; ++k) {
    const double e = 0.05 * k;
    CHECK(res.eval(e, 0.0) < 0.0);
    CHECK(res.eval(-e, 0.0) > 0.0);
  }
}

TEST_CASE("partition validation rejects malformed layouts") {
  auto p = FuzzyPartition::uniform(kLabels5);
  p.sets[1].center = 0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  auto q = FuzzyPartition::uniform(kLabels5);
  q.sets[2].half_width = 0.7;
  CHECK_THROWS_AS(q.validate(), ConfigError);

  auto r = FuzzyPartition::uniform(kLabels5);
  r.sets[0].shoulder = Shoulder::none;
  CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("controller_from_config: presets and inline grids") {
  CHECK(controller_from_config("resonance5").rules.at(0, 0) == 4);
  CHECK(controller_from_config("power9").rules.at(8, 4) == 8);
  CHECK_THROWS_AS(controller_from_config("nope"), ConfigError);

  // inline 5x5: an identity-ish custom grid parses and evaluates
  const std::string grid =
      "NL,NL,NS,Z,Z; NL,NS,NS,Z,PS; NS,NS,Z,PS,PS; NS,Z,PS,PS,PL; Z,PS,PS,PL,PL";
  const auto ctl = controller_from_config(grid);
  CHECK(ctl.rules.rows == 5);
  CHECK(ctl.eval(-1.0, -1.0) < 0.0);
  CHECK_THROWS_AS(controller_from_config("NL,NL;Z,Q"), ConfigError);
}
