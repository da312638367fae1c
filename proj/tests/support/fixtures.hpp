#ifndef DIAGCERT_TESTS_FIXTURES_HPP
#define DIAGCERT_TESTS_FIXTURES_HPP

#include <random>
#include <string>

#include "diagcert/model.hpp"

namespace diagcert::testing {

inline std::string data_path(const std::string& name) {
  return std::string(DIAGCERT_DATA_DIR) + "/" + name;
}

// The nine-state running example, built by hand (independent of the JSON
// loader so the two can cross-check each other).
inline FiniteModel running_example() {
  FiniteModel m;
  m.n = 1;
  m.q = 1;
  m.states = {{0}, {1.2}, {2.2}, {3.2}, {4.2}, {5.2}, {6.2}, {7.2}, {9}};
  m.outputs = m.states;
  m.initial = {0};
  m.faulty.assign(9, false);
  m.faulty[1] = true;
  m.inputs = {{1}, {2}};
  m.trans = {{1, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}, {8, 8}, {7, 7}, {8, 8}};
  return m;
}

// Random strongly-validated finite model for property tests: <= max_states
// states in R^1, <= max_inputs inputs, random total transitions, random
// faulty set, outputs = states.
inline FiniteModel random_finite_model(std::mt19937_64& rng,
                                       std::size_t max_states = 8,
                                       std::size_t max_inputs = 3) {
  std::uniform_int_distribution<std::size_t> ns(2, max_states);
  std::uniform_int_distribution<std::size_t> ni(1, max_inputs);
  const std::size_t S = ns(rng), I = ni(rng);
  FiniteModel m;
  m.n = 1;
  m.q = 1;
  std::uniform_real_distribution<double> val(0.0, 10.0);
  for (std::size_t s = 0; s < S; ++s) m.states.push_back({val(rng)});
  m.outputs = m.states;
  for (std::size_t u = 0; u < I; ++u) m.inputs.push_back({static_cast<double>(u)});
  std::uniform_int_distribution<std::size_t> pick(0, S - 1);
  m.trans.assign(S, std::vector<std::size_t>(I));
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t u = 0; u < I; ++u) m.trans[s][u] = pick(rng);
  m.faulty.assign(S, false);
  std::uniform_int_distribution<int> coin(0, 3);
  for (std::size_t s = 0; s < S; ++s) m.faulty[s] = coin(rng) == 0;
  // at least one non-faulty initial state keeps Def. 2 meaningful
  std::size_t init = pick(rng);
  m.faulty[init] = false;
  m.initial = {init};
  if (coin(rng) == 0) {
    const std::size_t extra = pick(rng);
    m.faulty[extra] = false;
    if (extra != init) m.initial.push_back(extra);
  }
  return m;
}

}  // namespace diagcert::testing

#endif
