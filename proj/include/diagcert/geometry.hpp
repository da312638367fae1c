#ifndef DIAGCERT_GEOMETRY_HPP
#define DIAGCERT_GEOMETRY_HPP

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "diagcert/interval.hpp"
#include "diagcert/polynomial.hpp"

namespace diagcert {

enum class Rel { Ge, Gt, Le, Lt };  // body rel 0

std::string rel_str(Rel r);

// Three-valued check of "v rel 0" at margin m. Strict relations keep an
// undecided band (0, m) so rounded certificates get a well-defined verdict.
enum class RelStatus { Pass, Fail, Undecided };
RelStatus rel_check(double v, Rel rel, double margin);
// Interval versions: definite conclusions over a whole box.
bool rel_definitely_pass(const Interval& v, Rel rel, double margin);
bool rel_definitely_fail(const Interval& v, Rel rel, double margin);

// Axis-aligned closed box over named dimensions.
struct Box {
  std::vector<VarId> vars;
  std::vector<Interval> ranges;

  std::size_t dim() const { return vars.size(); }
  bool contains(std::span<const double> p) const;
  double max_width() const;
  std::size_t widest_dim() const;  // tie -> lowest index
  std::pair<Box, Box> split(std::size_t d) const;
  std::vector<double> center() const;
  std::vector<double> sample(std::mt19937_64& rng) const;
  IntervalEnv interval_env() const;

  // Concatenation of two boxes over disjoint variable sets.
  static Box product(const Box& a, const Box& b);
};

// Validates lo <= hi; throws std::invalid_argument.
Box make_box(std::vector<VarId> vars, std::vector<Interval> ranges);
bool box_subset(const Box& inner, const Box& outer);  // same var order

struct PolyConstraint {
  Polynomial poly;
  Rel rel;
};

// Conjunction: base box plus polynomial sign constraints.
struct SemiAlgebraicSet {
  Box base;
  std::vector<PolyConstraint> constraints;

  // Exact membership; point given in base.vars order.
  bool contains(std::span<const double> p) const;
  // True when the interval evaluation of some constraint over `box` proves no
  // point of the box satisfies it (box given in base.vars order).
  bool definitely_excludes(std::span<const Interval> box) const;
  // True when every constraint is interval-satisfied over the whole box.
  bool definitely_contains(std::span<const Interval> box) const;
};

// Union of conjunctive pieces, all over the same variable ordering.
struct SetUnion {
  std::vector<SemiAlgebraicSet> branches;

  bool empty() const { return branches.empty(); }
  bool contains(std::span<const double> p) const;
  const std::vector<VarId>& vars() const;
};

}  // namespace diagcert

#endif
