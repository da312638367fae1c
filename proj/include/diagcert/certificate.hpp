#ifndef DIAGCERT_CERTIFICATE_HPP
#define DIAGCERT_CERTIFICATE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "diagcert/automaton.hpp"
#include "diagcert/falsifier.hpp"
#include "diagcert/model.hpp"

#include "json.hpp"

namespace diagcert {

// Piecewise certificate: one polynomial in (x, x̂) per DFA location, indexed
// by the Delta map (q̄0 -> 0, q_b -> b, F̄ -> K+1, trap -> K+2).
struct Certificate {
  char kind = 'B';  // 'B' or 'V'
  double delta = 0.0;
  int K = 0;
  std::vector<Polynomial> locations;  // size K+3

  double eval(int delta_index, std::span<const double> x,
              std::span<const double> xh) const;
};

Certificate certificate_from_json(const nlohmann::json& doc);
nlohmann::json certificate_to_json(const Certificate& c);
Certificate load_certificate_file(const std::filesystem::path& path);

// Monomial basis per location; coefficients are the CEGIS unknowns.
struct CertTemplate {
  char kind = 'B';
  int K = 0;
  std::vector<std::vector<Monomial>> monomials;  // per delta index

  static CertTemplate uniform_degree(char kind, int K, std::size_t n, int degree);
  std::size_t num_coeffs() const;
  std::size_t coeff_offset(int delta_index) const;
  Certificate instantiate(double delta, std::span<const double> coeffs) const;
};

// Over-approximation of P̃(R) \ R for condition (25)'s domain.
struct VDomainInfo {
  SetUnion pre_complement;  // over (x1..xn, xh1..xhn)
  std::string provenance;   // "computed", "computed (best effort...)", "user"
};

struct ConditionOptions {
  // Theorem 2 includes q = F̄ in the non-increase condition; the cited proof
  // text excludes it. Default follows the theorem statement.
  bool exclude_accepting_decrease = false;
  double strict_margin = 1e-6;
};

std::vector<UniversalConstraint> b_conditions(const SystemModel& model,
                                              const DeltaKDfa& dfa,
                                              const LabelPartition& part,
                                              const Certificate& cert,
                                              const ConditionOptions& opt = {});

struct VConditions {
  std::vector<UniversalConstraint> universal;      // (24) and (25)
  std::vector<ForallExistsConstraint> decrease;    // (26), one per location
};

VConditions v_conditions(const SystemModel& model, const DeltaKDfa& dfa,
                         const LabelPartition& part, const Certificate& cert,
                         const std::optional<VDomainInfo>& vdom,
                         const ConditionOptions& opt = {});

VDomainInfo compute_pre_complement(const ContinuousModel& model, double resolution);

enum class CheckMode { Falsify, Certify };
enum class CheckVerdict { Valid, Invalid, Unknown };
std::string verdict_str(CheckVerdict v);

struct ConditionReport {
  std::string name;
  FalsifyOutcome outcome;
  bool grid_checked = false;  // existential handled on an input grid
};

struct CertificateReport {
  CheckVerdict verdict = CheckVerdict::Unknown;
  std::vector<ConditionReport> conditions;
  double margin = 0.0;
  double resolution = 0.0;
  bool exhaustive = false;       // finite models: every point enumerated
  bool grid_validated = false;   // V certificates: existential grid semantics
};

CertificateReport check_certificate(const SystemModel& model, const DeltaKDfa& dfa,
                                    const LabelPartition& part,
                                    const Certificate& cert, CheckMode mode,
                                    const FalsifierConfig& cfg,
                                    const std::optional<VDomainInfo>& vdom = {},
                                    const ConditionOptions& opt = {});

// Shared helpers for condition construction (also used by CEGIS row builders).
namespace cond_detail {
// f with (x,u) renamed to (x̂,û).
std::vector<Polynomial> hatted_dynamics(const ContinuousModel& m);
// Substitution map sending x_i -> f_i(x,u) and xh_i -> f̂_i(x̂,û).
std::unordered_map<VarId, Polynomial> successor_subst(const ContinuousModel& m);
// Composes a guard over (x,x̂) with the successor map, yielding X̄(q,q')
// branches over (x,x̂,u,û) with base box X x X x U x U.
SetUnion compose_guard_with_dynamics(const ContinuousModel& m, const SetUnion& guard);
// Enumerated pair/quadruple domains for finite models.
std::vector<std::pair<std::size_t, std::size_t>> finite_pairs(const FiniteModel& m);
}  // namespace cond_detail

}  // namespace diagcert

#endif
