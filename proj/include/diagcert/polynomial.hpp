#ifndef DIAGCERT_POLYNOMIAL_HPP
#define DIAGCERT_POLYNOMIAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "diagcert/interval.hpp"

namespace diagcert {

using VarId = std::uint32_t;

// Process-wide variable interner. Ids are small and dense, so point
// environments can be flat arrays indexed by id.
VarId var_id(std::string_view name);
const std::string& var_name(VarId id);
std::size_t var_pool_size();

struct UnboundVariableError : std::runtime_error {
  explicit UnboundVariableError(VarId id);
};

// Point environment: VarId -> value.
class Env {
 public:
  void set(VarId id, double v);
  double get(VarId id) const;  // throws UnboundVariableError
  bool has(VarId id) const;

 private:
  std::vector<double> vals_;
  std::vector<bool> bound_;
};

// Interval environment: VarId -> interval.
class IntervalEnv {
 public:
  void set(VarId id, Interval iv);
  const Interval& get(VarId id) const;  // throws UnboundVariableError
  bool has(VarId id) const;

 private:
  std::vector<Interval> vals_;
  std::vector<bool> bound_;
};

// Exponent vector, sorted by variable id, all exponents > 0.
struct Monomial {
  std::vector<std::pair<VarId, std::uint32_t>> exps;

  static Monomial one() { return {}; }
  static Monomial var(VarId id, std::uint32_t e = 1);
  unsigned degree() const;
  bool operator==(const Monomial&) const = default;
  // graded-lex style order used to keep term lists canonical
  bool operator<(const Monomial& o) const;
  double eval(const Env& env) const;
  Interval interval_eval(const IntervalEnv& env) const;
  std::string str() const;
};

// Sparse multivariate polynomial with real coefficients. Normalized: no zero
// coefficients, terms sorted by monomial.
class Polynomial {
 public:
  Polynomial() = default;
  static Polynomial constant(double c);
  static Polynomial var(VarId id, std::uint32_t e = 1);
  static Polynomial from_terms(std::vector<std::pair<Monomial, double>> terms);

  const std::vector<std::pair<Monomial, double>>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  unsigned degree() const;
  std::vector<VarId> vars() const;  // sorted, unique
  double coeff(const Monomial& m) const;

  double eval(const Env& env) const;
  Interval interval_eval(const IntervalEnv& env) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double c) const;
  Polynomial pow(std::uint32_t e) const;

  // Substitutes polynomials for variables; variables absent from the map are
  // kept as-is.
  Polynomial substitute(const std::unordered_map<VarId, Polynomial>& subst) const;
  // Renames variables (used to build the hatted copy of f).
  Polynomial rename(const std::unordered_map<VarId, VarId>& names) const;

  std::string str() const;
  bool operator==(const Polynomial&) const = default;

 private:
  std::vector<std::pair<Monomial, double>> terms_;
  void normalize();
};

// Polynomial compiled against a fixed slot ordering, for hot loops
// (falsifier, diagnoser cloud propagation).
class CompiledPoly {
 public:
  CompiledPoly() = default;
  CompiledPoly(const Polynomial& p, std::span<const VarId> slots);
  double eval(std::span<const double> point) const;
  Interval interval_eval(std::span<const Interval> box) const;

 private:
  struct Term {
    double coeff;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> slot_exps;
  };
  std::vector<Term> terms_;
};

Env make_env(std::span<const VarId> vars, std::span<const double> vals);

}  // namespace diagcert

#endif
