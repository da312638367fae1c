#ifndef DIAGCERT_AUTOMATON_HPP
#define DIAGCERT_AUTOMATON_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diagcert/model.hpp"

#include "json.hpp"

namespace diagcert {

enum class Symbol : int { s1 = 0, s2 = 1, s3 = 2 };
std::string symbol_name(Symbol s);

// The (delta,K)-DFA over state pairs. States are indexed
//   0 = q̄0, 1..K = q_i, K+1 = F̄, K+2 = q_trap,
// which is also the Delta location index used by certificate templates.
//
// K = 0 degenerates the q_1..q_K chain: sigma3 from q̄0 goes straight to F̄
// (Def.-6 index arithmetic makes "q_K" mean q̄0 there; this instantiation is
// our reading and is exercised by tests).
class DeltaKDfa {
 public:
  DeltaKDfa(double delta, int K);  // throws std::invalid_argument

  double delta() const { return delta_; }
  int K() const { return K_; }
  int num_states() const { return K_ + 3; }
  int q0() const { return 0; }
  int fbar() const { return K_ + 1; }
  int trap() const { return K_ + 2; }

  int step(int q, Symbol s) const;
  std::vector<int> nxt(int q) const;  // sorted unique successors
  std::vector<Symbol> symbols_between(int q, int q2) const;
  int delta_index(int q) const { return q; }
  std::string state_name(int q) const;

  nlohmann::json to_json() const;

 private:
  double delta_;
  int K_;
  std::vector<std::array<int, 3>> trans_;  // trans_[q][symbol]
};

DeltaKDfa build_dfa(double delta, int K);

// Label partition over the augmented state set R = X x X:
//   P1 = pairs with ||h(x)-h(x̂)|| <= delta, P2 = x in XF, P3 = x̂ in XF,
//   sigma1 = P1 & !P2 & !P3, sigma2 = !P1 | (P1 & P3), sigma3 = P1 & P2 & !P3.
//
// Boundary pairs with ||h(x)-h(x̂)|| = delta belong to P1 per the paper; in
// floats an exact tie is unobservable, so P1 uses squared distance against
// delta^2 + tie_eps (tie_eps = 1e-9 * max(1, delta^2)), baked into the P1
// polynomial so the falsifier and the exact test agree.
class LabelPartition {
 public:
  LabelPartition(const SystemModel& model, double delta);

  double delta() const { return delta_; }
  const SystemModel& model() const { return *model_; }

  // Exact label of a pair; throws DomainError for points outside R.
  Symbol label(std::span<const double> x, std::span<const double> xh) const;

  // Tie-tolerant output-distance test shared with the diagnoser and oracles.
  bool within_delta(std::span<const double> y1, std::span<const double> y2) const;

  // Continuous models only: the label preimages as semi-algebraic unions over
  // (x1..xn, xh1..xhn) with base box X x X.
  const SetUnion& preimage(Symbol s) const;
  // delta^2 + tie - ||h(x)-h(x̂)||^2, the polynomial backing P1.
  const Polynomial& p1_poly() const;
  // Union of preimage(s) over all s with dfa.step(q, s) == q2 (possibly empty).
  SetUnion guard(const DeltaKDfa& dfa, int q, int q2) const;

  // Unique label of every pair in the interval box, when decidable.
  std::optional<Symbol> classify_box(std::span<const Interval> xbox,
                                     std::span<const Interval> xhbox) const;

 private:
  const SystemModel* model_;
  double delta_;
  double tie_eps_;
  // continuous machinery
  Polynomial p1_poly_;
  std::array<SetUnion, 3> preimages_;

  bool in_fault_set(std::span<const double> x) const;
  void build_continuous();
};

}  // namespace diagcert

#endif
