#ifndef DIAGCERT_FALSIFIER_HPP
#define DIAGCERT_FALSIFIER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diagcert/geometry.hpp"

namespace diagcert {

struct FalsifierConfig {
  double eps_box = 1e-3;        // minimum box width before a leaf is abandoned
  double margin = 1e-6;         // strictness margin (see rel_check)
  int input_grid = 9;           // grid points per input dimension (forall-exists)
  std::size_t max_boxes = 200000;  // box budget per constraint
  std::size_t presamples = 256;    // random probes per branch before B&B
  bool serial = true;
  int workers = 1;
  std::uint64_t seed = 20240817;
};

struct Counterexample {
  std::vector<double> point;  // in the constraint's variable order
  double value = 0.0;         // body value at the point
};

enum class OutcomeTag { Counterexample, NoneFound, Proved };

struct FalsifyOutcome {
  OutcomeTag tag = OutcomeTag::NoneFound;
  std::optional<Counterexample> cex;
  double resolution = 0.0;       // eps used when NoneFound
  bool budget_exhausted = false;
  std::size_t undecided = 0;     // leaves neither excluded nor satisfied
  std::size_t boxes = 0;         // boxes processed
};

// forall point in domain: body rel 0. Continuous domains are unions of
// semi-algebraic branches; finite models enumerate `finite_points` instead
// (with `finite_values` carrying table-computed body values when the body is
// not a polynomial in the point, e.g. finite-model successor terms).
struct UniversalConstraint {
  std::string name;
  std::vector<VarId> vars;
  SetUnion domain;
  Polynomial body;
  Rel rel = Rel::Le;
  double margin = 1e-6;
  std::optional<std::vector<std::vector<double>>> finite_points;
  std::optional<std::vector<double>> finite_values;
};

// One DFA edge inside a forall-exists constraint: the guard is X̄(q,q') over
// (x, x̂, u, û) and the body is the strict-decrease expression for that edge.
struct FEEdge {
  int q_to = 0;
  SetUnion guard;
  Polynomial body;
};

// forall (x,x̂) in outer domain, exists (u,û) in the inner box and an edge
// whose guard admits the quadruple, with edge body < 0. The existential is
// checked on a finite input grid (an under-approximation; see falsify notes).
struct ForallExistsConstraint {
  std::string name;
  std::vector<VarId> outer_vars, inner_vars;
  SetUnion outer_domain;
  Box inner_box;
  std::vector<FEEdge> edges;
  double margin = 1e-6;
  // finite variant: values[i][j] = best edge body value at outer point i under
  // input pair j (NaN when no edge admits the pair).
  std::optional<std::vector<std::vector<double>>> finite_outer;
  std::optional<std::vector<std::vector<double>>> finite_values;
};

// Searches for a concrete violating point. NoneFound when the box queue (or
// budget) is exhausted; never returns Proved.
FalsifyOutcome falsify(const UniversalConstraint& c, const FalsifierConfig& cfg);

// Sound proof attempt at the given spatial resolution: Proved iff every leaf
// box is interval-excluded from the domain or interval-satisfies the body.
FalsifyOutcome certify(const UniversalConstraint& c, double resolution,
                       const FalsifierConfig& cfg);

// Counterexample = an outer point at which no grid input achieves edge body
// below -margin. Grid density makes this advisory for continuous models.
FalsifyOutcome falsify_forall_exists(const ForallExistsConstraint& c,
                                     const FalsifierConfig& cfg);
FalsifyOutcome certify_forall_exists(const ForallExistsConstraint& c,
                                     double resolution, const FalsifierConfig& cfg);

// The input grid used by the forall-exists engines (shared with CEGIS).
std::vector<std::vector<double>> input_grid_points(const Box& inner, int per_dim);

}  // namespace diagcert

#endif
