#include "doctest.h"

#include "support/fixtures.hpp"

#include "diagcert/certificate.hpp"
#include "diagcert/falsifier.hpp"

using namespace diagcert;
using diagcert::testing::data_path;
using diagcert::testing::running_example;

namespace {

UniversalConstraint box_constraint(double lo, double hi, Polynomial body, Rel rel) {
  UniversalConstraint c;
  c.name = "test";
  c.vars = {var_id("x1")};
  SemiAlgebraicSet s;
  s.base = Box{{var_id("x1")}, {{lo, hi}}};
  c.domain.branches.push_back(s);
  c.body = std::move(body);
  c.rel = rel;
  return c;
}

}  // namespace

TEST_CASE("falsify: x^2 - 1 <= 0 over [-2,2] has endpoint counterexamples") {
  const auto c = box_constraint(
      -2, 2, Polynomial::var(var_id("x1"), 2) - Polynomial::constant(1.0), Rel::Le);
  const FalsifierConfig cfg;
  const auto o = falsify(c, cfg);
  REQUIRE(o.tag == OutcomeTag::Counterexample);
  CHECK(std::abs(o.cex->point[0]) > 1.0);
  CHECK(o.cex->value > cfg.margin);
}

TEST_CASE("falsify: zero certificate fails strict positivity everywhere") {
  // body = 0, relation > 0 over any box: every point is a counterexample
  const auto c = box_constraint(0, 1, Polynomial{}, Rel::Gt);
  const auto o = falsify(c, FalsifierConfig{});
  REQUIRE(o.tag == OutcomeTag::Counterexample);
  CHECK(o.cex->value == 0.0);
}

TEST_CASE("certify: globally negative body proves <= 0") {
  const auto c = box_constraint(
      -1, 1, -(Polynomial::var(var_id("x1"), 2) + Polynomial::constant(1.0)),
      Rel::Le);
  const auto o = certify(c, 0.1, FalsifierConfig{});
  CHECK(o.tag == OutcomeTag::Proved);
}

TEST_CASE("certify: x <= 0 over [-1,1] is refuted") {
  const auto c = box_constraint(-1, 1, Polynomial::var(var_id("x1")), Rel::Le);
  const auto o = certify(c, 0.1, FalsifierConfig{});
  REQUIRE(o.tag == OutcomeTag::Counterexample);
  CHECK(o.cex->point[0] > 0.0);
}

TEST_CASE("finite path: paper B certificate passes condition (16) exhaustively") {
  // this is the one condition the printed certificate does satisfy
  const SystemModel m{running_example()};
  const DeltaKDfa dfa(1.0, 3);
  const LabelPartition part(m, 1.0);
  const Certificate cert = load_certificate_file(data_path("cert_running_b13.json"));
  const auto conds = b_conditions(m, dfa, part, cert);
  bool seen = false;
  for (const auto& c : conds) {
    if (c.name != "positivity[F]") continue;
    seen = true;
    CHECK(c.finite_points->size() == 81);
    const auto o = falsify(c, FalsifierConfig{});
    CHECK(o.tag == OutcomeTag::NoneFound);
    const auto p = certify(c, 0.1, FalsifierConfig{});
    CHECK(p.tag == OutcomeTag::Proved);
  }
  CHECK(seen);
}

TEST_CASE("certify: initial condition over a single pair") {
  // B(0,0,q̄0) = -0.2075 <= 0, checked on the one initial pair
  const SystemModel m{running_example()};
  const DeltaKDfa dfa(1.0, 3);
  const LabelPartition part(m, 1.0);
  const Certificate cert = load_certificate_file(data_path("cert_running_b13.json"));
  const auto conds = b_conditions(m, dfa, part, cert);
  for (const auto& c : conds) {
    if (c.name != "init[q0]") continue;
    REQUIRE(c.finite_points->size() == 1);
    CHECK((*c.finite_values)[0] == doctest::Approx(-0.2075));
    const auto o = certify(c, 0.1, FalsifierConfig{});
    CHECK(o.tag == OutcomeTag::Proved);
  }
}

TEST_CASE("falsify_forall_exists: constant certificate cannot decrease") {
  // V == 0 everywhere: no strict decrease anywhere, so any outer point fails
  const SystemModel m{running_example()};
  const DeltaKDfa dfa(1.0, 2);
  const LabelPartition part(m, 1.0);
  Certificate zero;
  zero.kind = 'V';
  zero.delta = 1.0;
  zero.K = 2;
  zero.locations.assign(5, Polynomial{});
  const auto vc = v_conditions(m, dfa, part, zero, std::nullopt);
  REQUIRE(!vc.decrease.empty());
  const auto o = falsify_forall_exists(vc.decrease.front(), FalsifierConfig{});
  CHECK(o.tag == OutcomeTag::Counterexample);
}

TEST_CASE("falsify_forall_exists: single self-loop state fails immediately") {
  FiniteModel fm;
  fm.n = fm.q = 1;
  fm.states = {{0.0}};
  fm.outputs = fm.states;
  fm.initial = {0};
  fm.faulty = {false};
  fm.inputs = {{0.0}};
  fm.trans = {{0}};
  const SystemModel m{fm};
  const DeltaKDfa dfa(1.0, 1);
  const LabelPartition part(m, 1.0);
  Certificate zero;
  zero.kind = 'V';
  zero.delta = 1.0;
  zero.K = 1;
  zero.locations.assign(4, Polynomial{});
  const auto vc = v_conditions(m, dfa, part, zero, std::nullopt);
  const auto o = falsify_forall_exists(vc.decrease.front(), FalsifierConfig{});
  CHECK(o.tag == OutcomeTag::Counterexample);
}

TEST_CASE("determinism: identical configs give identical outcomes") {
  const auto c = box_constraint(
      -2, 2,
      Polynomial::var(var_id("x1"), 3) - Polynomial::var(var_id("x1")) * 0.7 -
          Polynomial::constant(0.01),
      Rel::Le);
  FalsifierConfig cfg;
  cfg.presamples = 64;
  const auto a = falsify(c, cfg);
  const auto b = falsify(c, cfg);
  REQUIRE(a.tag == b.tag);
  if (a.tag == OutcomeTag::Counterexample) {
    CHECK(a.cex->point == b.cex->point);
    CHECK(a.cex->value == b.cex->value);
  }
  CHECK(a.boxes == b.boxes);
  CHECK(a.undecided == b.undecided);
}

TEST_CASE("proved outcomes survive Monte-Carlo spot checks") {
  // certify on a nontrivial two-branch domain, then sample the domain densely
  UniversalConstraint c;
  c.vars = {var_id("x1"), var_id("x2")};
  SemiAlgebraicSet left;
  left.base = Box{c.vars, {{-2, -0.5}, {-1, 1}}};
  SemiAlgebraicSet right;
  right.base = Box{c.vars, {{0.5, 2}, {-1, 1}}};
  // restrict to the unit disk complement: x1^2 + x2^2 - 0.25 >= 0
  const Polynomial ring = Polynomial::var(var_id("x1"), 2) +
                          Polynomial::var(var_id("x2"), 2) -
                          Polynomial::constant(0.25);
  left.constraints.push_back({ring, Rel::Ge});
  right.constraints.push_back({ring, Rel::Ge});
  c.domain.branches = {left, right};
  // body: x1^2 >= 0.25 - 0.2 on the domain (true: |x1| >= 0.5)
  c.body = Polynomial::var(var_id("x1"), 2) - Polynomial::constant(0.05);
  c.rel = Rel::Ge;
  const auto o = certify(c, 0.05, FalsifierConfig{});
  REQUIRE(o.tag == OutcomeTag::Proved);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-2, 2), y(-1, 1);
  for (int i = 0; i < 100000; ++i) {
    const std::vector<double> p{x(rng), y(rng)};
    if (!c.domain.contains(p)) continue;
    const Env env = make_env(c.vars, p);
    CHECK(c.body.eval(env) >= -1e-9);
  }
}

TEST_CASE("parallel mode produces the same verdict as serial") {
  const auto c = box_constraint(
      -2, 2, Polynomial::var(var_id("x1"), 2) - Polynomial::constant(1.0), Rel::Le);
  FalsifierConfig serial;
  FalsifierConfig par;
  par.serial = false;
  par.workers = 4;
  const auto a = falsify(c, serial);
  const auto b = falsify(c, par);
  CHECK(a.tag == b.tag);
}
