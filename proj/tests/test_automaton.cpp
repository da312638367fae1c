#include <random>

#include "doctest.h"

#include "support/fixtures.hpp"

#include "diagcert/automaton.hpp"

using namespace diagcert;
using diagcert::testing::data_path;
using diagcert::testing::running_example;

TEST_CASE("build_dfa: (1,3) matches the six-state shape") {
  const DeltaKDfa dfa(1.0, 3);
  CHECK(dfa.num_states() == 6);
  CHECK(dfa.step(dfa.q0(), Symbol::s1) == dfa.q0());
  CHECK(dfa.step(dfa.q0(), Symbol::s3) == 1);
  CHECK(dfa.step(dfa.q0(), Symbol::s2) == dfa.trap());
  CHECK(dfa.step(1, Symbol::s1) == 2);
  CHECK(dfa.step(1, Symbol::s3) == 2);
  CHECK(dfa.step(2, Symbol::s1) == 3);
  CHECK(dfa.step(3, Symbol::s1) == dfa.fbar());
  CHECK(dfa.step(3, Symbol::s3) == dfa.fbar());
  for (Symbol s : {Symbol::s1, Symbol::s2, Symbol::s3}) {
    CHECK(dfa.step(dfa.fbar(), s) == dfa.fbar());
    CHECK(dfa.step(dfa.trap(), s) == dfa.trap());
  }
  for (int i = 0; i <= 3; ++i) CHECK(dfa.step(i, Symbol::s2) == dfa.trap());
}

TEST_CASE("build_dfa: (0.5,5) has eight states") {
  const DeltaKDfa dfa(0.5, 5);
  CHECK(dfa.num_states() == 8);
  CHECK(dfa.step(5, Symbol::s1) == dfa.fbar());
  CHECK(dfa.step(4, Symbol::s3) == 5);
}

TEST_CASE("build_dfa: K=0 degenerates the chain") {
  const DeltaKDfa dfa(1.0, 0);
  CHECK(dfa.num_states() == 3);
  CHECK(dfa.step(dfa.q0(), Symbol::s1) == dfa.q0());
  CHECK(dfa.step(dfa.q0(), Symbol::s3) == dfa.fbar());
  CHECK(dfa.step(dfa.q0(), Symbol::s2) == dfa.trap());
  // totality by enumeration
  for (int q = 0; q < dfa.num_states(); ++q)
    for (Symbol s : {Symbol::s1, Symbol::s2, Symbol::s3}) {
      const int to = dfa.step(q, s);
      CHECK(to >= 0);
      CHECK(to < dfa.num_states());
    }
}

TEST_CASE("build_dfa: bad parameters") {
  CHECK_THROWS_AS(DeltaKDfa(0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(DeltaKDfa(-1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(DeltaKDfa(1.0, -1), std::invalid_argument);
}

TEST_CASE("delta_index is a bijection onto [0, K+2]") {
  for (int K = 0; K <= 5; ++K) {
    const DeltaKDfa dfa(1.0, K);
    std::vector<bool> hit(K + 3, false);
    for (int q = 0; q < dfa.num_states(); ++q) {
      const int d = dfa.delta_index(q);
      REQUIRE(d >= 0);
      REQUIRE(d <= K + 2);
      CHECK(!hit[d]);
      hit[d] = true;
    }
  }
}

TEST_CASE("F̄ reachability characterization by word enumeration (K <= 5)") {
  // a word reaches F̄ iff it has a prefix sigma1^p sigma3 w with w the next K
  // symbols all in {sigma1, sigma3}
  const std::vector<Symbol> alphabet{Symbol::s1, Symbol::s2, Symbol::s3};
  for (int K = 0; K <= 5; ++K) {
    const DeltaKDfa dfa(1.0, K);
    const int len = std::min(K + 3, 7);
    std::vector<int> word(len, 0);
    while (true) {
      int q = dfa.q0();
      bool hit_f = false;
      for (int i = 0; i < len; ++i) {
        q = dfa.step(q, alphabet[word[i]]);
        if (q == dfa.fbar()) hit_f = true;
      }
      bool expected = false;
      for (int p = 0; p + K < len && !expected; ++p) {
        bool ok = true;
        for (int i = 0; i < p && ok; ++i) ok = word[i] == 0;       // sigma1 prefix
        if (ok) ok = word[p] == 2;                                  // sigma3
        for (int i = p + 1; i <= p + K && ok; ++i) ok = word[i] != 1;  // no sigma2
        expected = ok;
      }
      CHECK(hit_f == expected);
      int d = 0;
      while (d < len && ++word[d] == 3) word[d++] = 0;
      if (d == len) break;
    }
  }
}

TEST_CASE("label: running example") {
  const SystemModel m{running_example()};
  const LabelPartition part(m, 1.0);
  CHECK(part.label(std::vector{0.0}, std::vector{0.0}) == Symbol::s1);
  CHECK(part.label(std::vector{1.2}, std::vector{2.2}) == Symbol::s3);
  CHECK(part.label(std::vector{3.2}, std::vector{5.2}) == Symbol::s2);
  // boundary pair at exact distance delta stays in P1 (tie tolerance)
  CHECK(part.label(std::vector{3.2}, std::vector{4.2}) == Symbol::s1);
  // x̂ faulty and close -> sigma2 branch P1 ∩ P3
  CHECK(part.label(std::vector{2.2}, std::vector{1.2}) == Symbol::s2);
  CHECK_THROWS_AS(part.label(std::vector{0.7}, std::vector{0.0}), DomainError);
}

TEST_CASE("nxt: (K=3) examples") {
  const DeltaKDfa dfa(1.0, 3);
  CHECK(dfa.nxt(dfa.q0()) == std::vector<int>{0, 1, dfa.trap()});
  CHECK(dfa.nxt(dfa.fbar()) == std::vector<int>{dfa.fbar()});
  CHECK(dfa.nxt(2) == std::vector<int>{3, dfa.trap()});
}

TEST_CASE("guard: symbol composition") {
  const SystemModel m = load_system_file(data_path("two_room.json"));
  const LabelPartition part(m, 0.5);
  const DeltaKDfa dfa(0.5, 5);
  // q̄0 -> q1 is triggered by sigma3 only
  const SetUnion g01 = part.guard(dfa, dfa.q0(), 1);
  CHECK(g01.branches.size() == part.preimage(Symbol::s3).branches.size());
  // trap -> F̄ is impossible
  CHECK(part.guard(dfa, dfa.trap(), dfa.fbar()).empty());
  // q1 -> q2 fires on sigma1 or sigma3
  const SetUnion g12 = part.guard(dfa, 1, 2);
  CHECK(g12.branches.size() == part.preimage(Symbol::s1).branches.size() +
                                   part.preimage(Symbol::s3).branches.size());
}

TEST_CASE("partition property: finite model, exhaustive") {
  const FiniteModel fm = running_example();
  const SystemModel m{fm};
  const LabelPartition part(m, 1.0);
  for (const auto& x : fm.states)
    for (const auto& xh : fm.states) {
      int hits = 0;
      const Symbol s = part.label(x, xh);
      for (Symbol cand : {Symbol::s1, Symbol::s2, Symbol::s3})
        if (cand == s) ++hits;
      CHECK(hits == 1);
    }
}

TEST_CASE("partition property: continuous preimages cover each point exactly once") {
  const SystemModel m = load_system_file(data_path("two_room.json"));
  const auto& cm = as_continuous(m);
  const LabelPartition part(m, 0.5);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> val(15.0, 30.0);
  std::size_t bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::vector<double> p{val(rng), val(rng), val(rng), val(rng)};
    int count = 0;
    Symbol found = Symbol::s1;
    for (Symbol s : {Symbol::s1, Symbol::s2, Symbol::s3})
      if (part.preimage(s).contains(p)) {
        ++count;
        found = s;
      }
    if (count != 1) {
      ++bad;
      continue;
    }
    // the semi-algebraic membership agrees with the exact label
    const std::vector<double> x{p[0], p[1]}, xh{p[2], p[3]};
    if (part.label(x, xh) != found) ++bad;
  }
  CHECK(bad == 0);
  (void)cm;
}

TEST_CASE("DFA JSON dump shape") {
  const DeltaKDfa dfa(1.0, 3);
  const auto j = dfa.to_json();
  CHECK(j.at("states").size() == 6);
  CHECK(j.at("transitions").size() == 18);
  CHECK(j.at("delta_index").at("F") == 4);
  CHECK(j.at("delta_index").at("trap") == 5);
}
