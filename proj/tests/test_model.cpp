#include "doctest.h"

#include "support/fixtures.hpp"

#include "diagcert/model.hpp"

using namespace diagcert;
using diagcert::testing::data_path;
using diagcert::testing::running_example;

TEST_CASE("load_system: two-room spec") {
  const SystemModel m = load_system_file(data_path("two_room.json"));
  const auto& cm = as_continuous(m);
  CHECK(cm.n == 2);
  CHECK(cm.m == 2);
  CHECK(cm.q == 2);
  CHECK(cm.X.ranges[0].lo == 15.0);
  CHECK(cm.X.ranges[1].hi == 30.0);
  CHECK(cm.X0.ranges[0].lo == 19.5);
  CHECK(cm.X0.ranges[0].hi == 20.5);
  CHECK(cm.XF.ranges[0].lo == 24.0);
  CHECK(cm.XF.ranges[1].hi == 26.0);
  CHECK(cm.U.ranges[0].lo == 0.0);
  CHECK(cm.U.ranges[1].hi == 1.0);

  const std::vector<double> x{20, 20}, u{0.5, 0.5};
  const auto nx = cm.eval_f(x, u);
  CHECK(nx[0] == doctest::Approx(21.575));
  CHECK(nx[1] == doctest::Approx(21.575));
}

TEST_CASE("load_system: running example has nine states") {
  const SystemModel m = load_system_file(data_path("running.json"));
  const auto& fm = as_finite(m);
  CHECK(fm.states.size() == 9);
  CHECK(fm.initial.size() == 1);
  CHECK(fm.states[fm.initial[0]][0] == 0.0);
  std::size_t faulty_count = 0, faulty_at = 0;
  for (std::size_t i = 0; i < fm.faulty.size(); ++i)
    if (fm.faulty[i]) {
      ++faulty_count;
      faulty_at = i;
    }
  CHECK(faulty_count == 1);
  CHECK(fm.states[faulty_at][0] == doctest::Approx(1.2));

  // loader agrees with the hand-built fixture
  const FiniteModel ref = running_example();
  REQUIRE(fm.states.size() == ref.states.size());
  for (std::size_t s = 0; s < ref.states.size(); ++s)
    for (std::size_t u = 0; u < ref.inputs.size(); ++u)
      CHECK(fm.trans[s][u] == ref.trans[s][u]);
}

TEST_CASE("load_system: containment violation is rejected") {
  nlohmann::json doc;
  doc["kind"] = "continuous";
  doc["n"] = 2;
  doc["m"] = 1;
  doc["X"] = {{15, 30}, {15, 30}};
  doc["X0"] = {{0, 40}, {0, 40}};
  doc["XF"] = {{24, 26}, {24, 26}};
  doc["U"] = {{0, 1}};
  doc["f"] = {nlohmann::json::array(), nlohmann::json::array()};
  doc["h"] = {nlohmann::json::array()};
  CHECK_THROWS_WITH_AS(load_system(doc), "initial set not contained in state set",
                       SpecError);
}

TEST_CASE("load_system: non-total finite transition map is rejected") {
  nlohmann::json doc;
  doc["kind"] = "finite";
  doc["states"] = {{0.0}, {1.0}};
  doc["initial"] = {0};
  doc["faulty"] = {1};
  doc["inputs"] = {{0.0}};
  doc["trans"] = {{0, 0, 1}};  // state 1 has no transition
  doc["output"] = {{0.0}, {1.0}};
  CHECK_THROWS_AS(load_system(doc), SpecError);
}

TEST_CASE("load_system: undeclared variable in f is rejected") {
  nlohmann::json doc;
  doc["kind"] = "continuous";
  doc["n"] = 1;
  doc["m"] = 1;
  doc["X"] = {{0, 1}};
  doc["X0"] = {{0, 1}};
  doc["XF"] = {{0, 1}};
  doc["U"] = {{0, 1}};
  doc["f"] = {{{{"coeff", 1.0}, {"exps", {{"x7", 1}}}}}};
  doc["h"] = {{{{"coeff", 1.0}, {"exps", {{"x1", 1}}}}}};
  CHECK_THROWS_AS(load_system(doc), SpecError);
}

TEST_CASE("successor: running example") {
  const SystemModel m{running_example()};
  CHECK(successor(m, std::vector{0.0}, std::vector{1.0})[0] == doctest::Approx(1.2));
  CHECK(successor(m, std::vector{7.2}, std::vector{2.0})[0] == doctest::Approx(7.2));
  CHECK_THROWS_AS(successor(m, std::vector{0.5}, std::vector{1.0}), DomainError);
  CHECK_THROWS_AS(successor(m, std::vector{0.0}, std::vector{3.0}), DomainError);
}

TEST_CASE("successor: two-room") {
  const SystemModel m = load_system_file(data_path("two_room.json"));
  const auto nx = successor(m, std::vector{20.0, 20.0}, std::vector{0.5, 0.5});
  CHECK(nx[0] == doctest::Approx(21.575));
  CHECK(nx[1] == doctest::Approx(21.575));
  CHECK_THROWS_AS(successor(m, std::vector{10.0, 20.0}, std::vector{0.5, 0.5}),
                  DomainError);
}

TEST_CASE("system JSON round-trip") {
  for (const char* file : {"running.json", "two_room.json"}) {
    const SystemModel m = load_system_file(data_path(file));
    const SystemModel m2 = load_system(system_to_json(m));
    CHECK(system_to_json(m) == system_to_json(m2));
  }
}
