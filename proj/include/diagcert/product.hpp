#ifndef DIAGCERT_PRODUCT_HPP
#define DIAGCERT_PRODUCT_HPP

#include <optional>
#include <utility>
#include <vector>

#include "diagcert/automaton.hpp"
#include "diagcert/model.hpp"

namespace diagcert {

// Product state by value; works for both model flavors.
struct ProductPoint {
  std::vector<double> x, xh;
  int q = 0;
};

// Finite-model product state by index.
struct ProductState {
  std::size_t x = 0, xh = 0;
  int q = 0;
  bool operator==(const ProductState&) const = default;
};

struct Witness {
  std::vector<double> x0, xh0;
  std::vector<std::vector<double>> u_run, uh_run;
  // replayed state runs, length |u_run|+1
  std::vector<std::vector<double>> x_run, xh_run;
  std::size_t fault_step = 0;  // first XF visit of the x-run
};

struct Verdict {
  bool diagnosable = false;
  std::optional<Witness> witness;  // present iff not diagnosable
};

ProductPoint product_step(const SystemModel& model, const DeltaKDfa& dfa,
                          const LabelPartition& part, const ProductPoint& s,
                          std::span<const double> u, std::span<const double> uh);

std::vector<ProductState> initial_product_states(const FiniteModel& model,
                                                 const DeltaKDfa& dfa,
                                                 const LabelPartition& part);

// Continuous models: X0 x X0 split by label, as (region, DFA location) pairs.
std::vector<std::pair<SemiAlgebraicSet, int>> initial_product_regions(
    const ContinuousModel& model, const DeltaKDfa& dfa, const LabelPartition& part);

// Exact decision for finite models via BFS over the product (Theorem 1 /
// Corollary 1). Rejects continuous models with ModelKindError.
Verdict verify_exact(const SystemModel& model, double delta, int K);

// Brute-force test oracle straight from the diagnosability definition: a
// memoized search over run pairs tracking steps-since-fault, bounded by
// `horizon`. Requires horizon >= |states|^2 * (K+3).
Verdict definitional_check(const FiniteModel& model, double delta, int K,
                           std::size_t horizon);

// Replays a witness and checks the violation clauses (used by tests and the
// oracle CLI): x-run first enters XF at fault_step, x̂-run avoids XF on
// [0, fault_step+K], outputs stay within delta on that window.
bool witness_valid(const SystemModel& model, const LabelPartition& part,
                   const Witness& w, int K);

nlohmann::json witness_to_json(const Witness& w);

}  // namespace diagcert

#endif
