#include <random>

#include "doctest.h"

#include "support/fixtures.hpp"

#include "diagcert/product.hpp"

using namespace diagcert;
using diagcert::testing::data_path;
using diagcert::testing::random_finite_model;
using diagcert::testing::running_example;

TEST_CASE("product_step: running example") {
  const SystemModel m{running_example()};
  const DeltaKDfa dfa(1.0, 3);
  const LabelPartition part(m, 1.0);

  ProductPoint s{{0.0}, {0.0}, dfa.q0()};
  const auto s1 = product_step(m, dfa, part, s, std::vector{1.0}, std::vector{2.0});
  CHECK(s1.x[0] == doctest::Approx(1.2));
  CHECK(s1.xh[0] == doctest::Approx(2.2));
  CHECK(s1.q == 1);

  ProductPoint trap{{7.2}, {9.0}, dfa.trap()};
  const auto s2 =
      product_step(m, dfa, part, trap, std::vector{1.0}, std::vector{1.0});
  CHECK(s2.x[0] == doctest::Approx(7.2));
  CHECK(s2.xh[0] == doctest::Approx(9.0));
  CHECK(s2.q == dfa.trap());

  ProductPoint q1{{1.2}, {2.2}, 1};
  const auto s3 = product_step(m, dfa, part, q1, std::vector{1.0}, std::vector{1.0});
  CHECK(s3.x[0] == doctest::Approx(3.2));
  CHECK(s3.xh[0] == doctest::Approx(4.2));
  CHECK(s3.q == 2);
}

TEST_CASE("initial_product_states: running example") {
  const FiniteModel fm = running_example();
  const SystemModel m{fm};
  const DeltaKDfa dfa(1.0, 3);
  const LabelPartition part(m, 1.0);
  const auto init = initial_product_states(fm, dfa, part);
  REQUIRE(init.size() == 1);
  CHECK(init[0].x == 0);
  CHECK(init[0].xh == 0);
  CHECK(init[0].q == dfa.q0());
}

TEST_CASE("initial_product_states: all-faulty initial set goes to the trap") {
  FiniteModel fm;
  fm.n = fm.q = 1;
  fm.states = {{0.0}, {1.0}};
  fm.outputs = fm.states;
  fm.initial = {0};
  fm.faulty = {true, false};
  fm.inputs = {{0.0}};
  fm.trans = {{1}, {1}};
  const SystemModel m{fm};
  const DeltaKDfa dfa(1.0, 2);
  const LabelPartition part(m, 1.0);
  const auto init = initial_product_states(fm, dfa, part);
  REQUIRE(init.size() == 1);
  // (x0, x̂0) with x̂0 faulty is labeled sigma2 (P1 ∩ P3 branch)
  CHECK(init[0].q == dfa.trap());
}

TEST_CASE("initial_product_regions: two-room split has sigma1 and sigma2 cells") {
  const SystemModel m = load_system_file(data_path("two_room.json"));
  const auto& cm = as_continuous(m);
  const DeltaKDfa dfa(0.5, 5);
  const LabelPartition part(m, 0.5);
  const auto regions = initial_product_regions(cm, dfa, part);
  bool has_q0 = false, has_trap = false, has_q1 = false;
  for (const auto& [set, q] : regions) {
    if (q == dfa.q0()) has_q0 = true;
    if (q == dfa.trap()) has_trap = true;
    if (q == 1) has_q1 = true;
    // every region's base stays inside X0 x X0
    for (std::size_t d = 0; d < set.base.dim(); ++d) {
      CHECK(set.base.ranges[d].lo >= 19.5 - 1e-12);
      CHECK(set.base.ranges[d].hi <= 20.5 + 1e-12);
    }
  }
  CHECK(has_q0);
  CHECK(has_trap);   // corner pairs are > delta apart, so sigma2 cells exist
  CHECK(!has_q1);    // X0 does not meet XF, so no sigma3 cell survives clipping
}

TEST_CASE("verify_exact: running example at K=3 and K=2") {
  const SystemModel m{running_example()};
  const Verdict v3 = verify_exact(m, 1.0, 3);
  CHECK(v3.diagnosable);
  CHECK(!v3.witness);

  const Verdict v2 = verify_exact(m, 1.0, 2);
  CHECK(!v2.diagnosable);
  REQUIRE(v2.witness);
  const LabelPartition part(m, 1.0);
  CHECK(witness_valid(m, part, *v2.witness, 2));
  CHECK(v2.witness->fault_step == 1);
}

TEST_CASE("verify_exact: no reachable fault means diagnosable") {
  FiniteModel fm;
  fm.n = fm.q = 1;
  fm.states = {{0.0}, {5.0}};
  fm.outputs = fm.states;
  fm.initial = {0};
  fm.faulty = {false, true};
  fm.inputs = {{0.0}};
  fm.trans = {{0}, {1}};  // faulty state unreachable from 0
  const Verdict v = verify_exact(SystemModel{fm}, 1.0, 1);
  CHECK(v.diagnosable);
}

TEST_CASE("verify_exact rejects continuous models with a typed error") {
  const SystemModel m = load_system_file(data_path("two_room.json"));
  CHECK_THROWS_AS(verify_exact(m, 0.5, 5), ModelKindError);
}

TEST_CASE("definitional_check agrees on the running example") {
  const FiniteModel fm = running_example();
  const std::size_t horizon3 = 81 * 6;  // |X|^2 (K+3)
  const Verdict d3 = definitional_check(fm, 1.0, 3, horizon3);
  CHECK(d3.diagnosable);
  const Verdict d2 = definitional_check(fm, 1.0, 2, 81 * 5);
  CHECK(!d2.diagnosable);
  REQUIRE(d2.witness);
  const LabelPartition part(SystemModel{fm}, 1.0);
  CHECK(witness_valid(SystemModel{fm}, part, *d2.witness, 2));
}

TEST_CASE("definitional_check: horizon precondition") {
  const FiniteModel fm = running_example();
  CHECK_THROWS_AS(definitional_check(fm, 1.0, 3, 10), std::invalid_argument);
}

TEST_CASE("definitional_check: single state, no fault reachable") {
  FiniteModel fm;
  fm.n = fm.q = 1;
  fm.states = {{0.0}};
  fm.outputs = fm.states;
  fm.initial = {0};
  fm.faulty = {false};
  fm.inputs = {{0.0}};
  fm.trans = {{0}};
  const Verdict v = definitional_check(fm, 1.0, 2, 1 * 5);
  CHECK(v.diagnosable);
}

TEST_CASE("oracle agreement on random finite models") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 60; ++round) {
    const FiniteModel fm = random_finite_model(rng);
    const double delta = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
    const int K = std::uniform_int_distribution<int>(0, 3)(rng);
    const std::size_t horizon = fm.states.size() * fm.states.size() * (K + 3);
    const Verdict a = verify_exact(SystemModel{fm}, delta, K);
    const Verdict b = definitional_check(fm, delta, K, horizon);
    CHECK(a.diagnosable == b.diagnosable);
    if (!a.diagnosable) {
      const LabelPartition part(SystemModel{fm}, delta);
      CHECK(witness_valid(SystemModel{fm}, part, *a.witness, K));
      CHECK(witness_valid(SystemModel{fm}, part, *b.witness, K));
    }
  }
}

TEST_CASE("monotonicity in K and delta") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 40; ++round) {
    const FiniteModel fm = random_finite_model(rng);
    const SystemModel m{fm};
    const double delta = std::uniform_real_distribution<double>(0.5, 2.5)(rng);
    const int K = std::uniform_int_distribution<int>(0, 2)(rng);
    if (verify_exact(m, delta, K).diagnosable) {
      CHECK(verify_exact(m, delta, K + 1).diagnosable);
      CHECK(verify_exact(m, delta, K + 2).diagnosable);
      CHECK(verify_exact(m, delta * 0.5, K).diagnosable);
      CHECK(verify_exact(m, delta * 0.11, K).diagnosable);
    }
  }
}
