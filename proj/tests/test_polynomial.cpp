#include <random>

#include "doctest.h"

#include "diagcert/polynomial.hpp"
#include "diagcert/geometry.hpp"

using namespace diagcert;

namespace {
Polynomial pvar(const char* name, std::uint32_t e = 1) {
  return Polynomial::var(var_id(name), e);
}
}  // namespace

TEST_CASE("eval: direct arithmetic") {
  // x1 + x2^2 at (2,3) = 11
  const Polynomial p = pvar("x1") + pvar("x2", 2);
  Env env;
  env.set(var_id("x1"), 2.0);
  env.set(var_id("x2"), 3.0);
  CHECK(p.eval(env) == doctest::Approx(11.0));
}

TEST_CASE("eval: running-example barrier piece at the origin pair") {
  // the q̄0 piece of the running-example B-HBC has constant term -0.2075
  const Polynomial b0 =
      Polynomial::constant(-0.2075) + pvar("x1") * 0.2024 + pvar("xh1") * 0.2024 +
      pvar("x1", 2) * -0.1001 + (pvar("x1") * pvar("xh1")) * -0.1435 +
      pvar("xh1", 2) * -0.1001 + pvar("x1", 3) * 0.0248 +
      (pvar("x1", 2) * pvar("xh1")) * -0.0134 +
      (pvar("x1") * pvar("xh1", 2)) * -0.0134 + pvar("xh1", 3) * 0.0248;
  Env env;
  env.set(var_id("x1"), 0.0);
  env.set(var_id("xh1"), 0.0);
  CHECK(b0.eval(env) == doctest::Approx(-0.2075));
}

TEST_CASE("eval: two-room x1 update at x=(20,20), u=(0.5,0.5)") {
  // independently recomputed: (0.94 - 0.145*0.5)*20 + 0.01*20 + 7.25*0.5 + 0.4
  const double expected = (0.94 - 0.145 * 0.5) * 20 + 0.01 * 20 + 7.25 * 0.5 + 0.4;
  REQUIRE(expected == doctest::Approx(21.575));
  const Polynomial f1 = pvar("x1") * 0.94 + (pvar("x1") * pvar("u1")) * -0.145 +
                        pvar("x2") * 0.01 + pvar("u1") * 7.25 +
                        Polynomial::constant(0.4);
  Env env;
  env.set(var_id("x1"), 20.0);
  env.set(var_id("x2"), 20.0);
  env.set(var_id("u1"), 0.5);
  CHECK(f1.eval(env) == doctest::Approx(21.575));
}

TEST_CASE("eval: unbound variable is reported by name") {
  const Polynomial p = pvar("x1") + pvar("x2");
  Env env;
  env.set(var_id("x1"), 1.0);
  CHECK_THROWS_WITH_AS(p.eval(env), "unbound variable: x2", UnboundVariableError);
}

TEST_CASE("interval_eval examples") {
  IntervalEnv env;
  env.set(var_id("x1"), {-1, 2});
  // x^2 under naive term-wise bounds: [-1,2]*[-1,2] = [-2,4]
  const Interval sq = pvar("x1", 2).interval_eval(env);
  CHECK(sq.lo == doctest::Approx(-2).epsilon(1e-12));
  CHECK(sq.hi == doctest::Approx(4).epsilon(1e-12));
  CHECK(sq.lo <= 0.0);
  CHECK(sq.hi >= 4.0);  // encloses the true range [0,4]

  IntervalEnv env2;
  env2.set(var_id("x1"), {3, 5});
  const Interval id = pvar("x1").interval_eval(env2);
  CHECK(id.lo == doctest::Approx(3));
  CHECK(id.hi == doctest::Approx(5));

  IntervalEnv env3;
  env3.set(var_id("x1"), {-1, 1});
  env3.set(var_id("x2"), {0, 2});
  const Interval prod = (pvar("x1") * pvar("x2")).interval_eval(env3);
  CHECK(prod.lo == doctest::Approx(-2));
  CHECK(prod.hi == doctest::Approx(2));
}

namespace {
Polynomial random_poly(std::mt19937_64& rng, int nvars, int max_terms) {
  std::uniform_int_distribution<int> terms(1, max_terms);
  std::uniform_int_distribution<int> deg(0, 3);
  std::uniform_real_distribution<double> coeff(-3.0, 3.0);
  std::vector<std::pair<Monomial, double>> ts;
  const int T = terms(rng);
  for (int t = 0; t < T; ++t) {
    Monomial m;
    for (int v = 0; v < nvars; ++v) {
      const int e = deg(rng);
      if (e > 0)
        m.exps.emplace_back(var_id("x" + std::to_string(v + 1)),
                            static_cast<std::uint32_t>(e));
    }
    ts.emplace_back(std::move(m), coeff(rng));
  }
  return Polynomial::from_terms(std::move(ts));
}
}  // namespace

TEST_CASE("ring laws on random instances") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  for (int round = 0; round < 200; ++round) {
    const Polynomial p = random_poly(rng, 3, 4);
    const Polynomial q = random_poly(rng, 3, 4);
    Env env;
    for (int v = 0; v < 3; ++v) env.set(var_id("x" + std::to_string(v + 1)), val(rng));
    const double vp = p.eval(env), vq = q.eval(env);
    const double sum = (p + q).eval(env);
    const double prod = (p * q).eval(env);
    CHECK(sum == doctest::Approx(vp + vq).epsilon(1e-12));
    CHECK(prod == doctest::Approx(vp * vq).epsilon(1e-12));
  }
}

TEST_CASE("interval soundness: eval stays inside interval_eval") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lo(-3.0, 1.0);
  std::uniform_real_distribution<double> width(0.0, 3.0);
  std::size_t violations = 0;
  for (int round = 0; round < 10000; ++round) {
    const Polynomial p = random_poly(rng, 2, 4);
    IntervalEnv ienv;
    Env env;
    for (int v = 0; v < 2; ++v) {
      const double l = lo(rng);
      const double h = l + width(rng);
      const VarId id = var_id("x" + std::to_string(v + 1));
      ienv.set(id, {l, h});
      std::uniform_real_distribution<double> inside(l, h);
      env.set(id, inside(rng));
    }
    const Interval iv = p.interval_eval(ienv);
    const double v = p.eval(env);
    if (!(iv.lo <= v && v <= iv.hi)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("interval refinement: splitting never widens the hull") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 500; ++round) {
    const Polynomial p = random_poly(rng, 2, 4);
    std::uniform_real_distribution<double> lo(-2.0, 0.0), width(0.1, 2.0);
    std::vector<VarId> vars{var_id("x1"), var_id("x2")};
    std::vector<Interval> ranges;
    for (int v = 0; v < 2; ++v) {
      const double l = lo(rng);
      ranges.push_back({l, l + width(rng)});
    }
    const Box box{vars, ranges};
    const Interval whole = p.interval_eval(box.interval_env());
    const auto [a, b] = box.split(box.widest_dim());
    const Interval ha = p.interval_eval(a.interval_env());
    const Interval hb = p.interval_eval(b.interval_env());
    const Interval hull = ha.hull(hb);
    CHECK(hull.lo >= whole.lo - 1e-12);
    CHECK(hull.hi <= whole.hi + 1e-12);
  }
}

TEST_CASE("substitution agrees with pointwise composition") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> val(-1.5, 1.5);
  for (int round = 0; round < 100; ++round) {
    const Polynomial outer = random_poly(rng, 2, 3);
    const Polynomial inner1 = random_poly(rng, 2, 3);
    const Polynomial inner2 = random_poly(rng, 2, 3);
    std::unordered_map<VarId, Polynomial> subst{{var_id("x1"), inner1},
                                                {var_id("x2"), inner2}};
    const Polynomial composed = outer.substitute(subst);
    Env env;
    env.set(var_id("x1"), val(rng));
    env.set(var_id("x2"), val(rng));
    Env env2;
    env2.set(var_id("x1"), inner1.eval(env));
    env2.set(var_id("x2"), inner2.eval(env));
    CHECK(composed.eval(env) == doctest::Approx(outer.eval(env2)).epsilon(1e-10));
  }
}

TEST_CASE("compiled polynomial matches plain evaluation") {
  std::mt19937_64 rng(5);
  const Polynomial p = random_poly(rng, 3, 6);
  const std::vector<VarId> slots{var_id("x1"), var_id("x2"), var_id("x3")};
  const CompiledPoly cp(p, slots);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> pt{val(rng), val(rng), val(rng)};
    Env env;
    for (int v = 0; v < 3; ++v) env.set(slots[v], pt[v]);
    CHECK(cp.eval(pt) == doctest::Approx(p.eval(env)).epsilon(1e-12));
  }
}
