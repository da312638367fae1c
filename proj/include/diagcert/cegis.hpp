#ifndef DIAGCERT_CEGIS_HPP
#define DIAGCERT_CEGIS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diagcert/certificate.hpp"
#include "diagcert/linprog.hpp"

namespace diagcert {

using PointPair = std::pair<std::vector<double>, std::vector<double>>;

// Sample bank. d_x / d_u feed the B loop, d_x_v the V loop. shell holds
// counterexamples to condition (25), whose domain lies outside R (keeping the
// d_x/d_x_v members inside R). cex_quads pins (17)-counterexample quadruples
// so a violated (state-pair, input-pair) combination always re-enters the LP.
struct SampleBank {
  std::vector<PointPair> d_x;
  std::vector<PointPair> d_u;
  std::vector<PointPair> d_x_v;
  std::vector<PointPair> shell;
  std::vector<std::vector<double>> cex_quads;  // (x, x̂, u, û)
};

struct CegisConfig {
  int degree = 2;
  std::size_t state_samples = 0;   // 0 -> 50 * dim(R)
  std::size_t input_samples = 0;   // 0 -> 20 * dim(U x U)
  std::size_t vloop_samples = 0;   // 0 -> 50 * dim(R)
  std::size_t cross_inputs = 16;   // input pairs crossed per state pair (B loop)
  double eps_pos = 1e-3;           // strictness slack for (16) / (25)
  double eps_dec = 1e-3;           // strictness slack for the decrease condition
  double coeff_bound = 1e3;
  std::size_t max_iterations = 50;
  int assign_grid = 5;             // per input dimension, V-loop disjunct grid
  std::size_t max_alternations = 25;
  std::size_t max_exhaustive_pairs = 40000;  // finite: full-bank size cap
  FalsifierConfig falsifier;
  std::uint64_t seed = 20240817;
};

struct FitResult {
  bool feasible = false;
  std::vector<double> coeffs;
  double margin = 0.0;
  std::size_t rows = 0;
  bool iteration_limit = false;
};

enum class SynthStatus { Certified, TemplateInfeasible, Budget };

struct SynthResult {
  SynthStatus status = SynthStatus::Budget;
  std::optional<Certificate> certificate;
  bool at_resolution = false;  // continuous models: certified at resolution
  std::vector<std::string> log;
  SampleBank bank;
  std::optional<CertificateReport> report;
  std::size_t iterations = 0;
};

// Linear feasibility fit of the B-template coefficients against the sampled
// conditions; margin maximization with coefficients boxed by coeff_bound.
FitResult fit_b_coefficients(const SystemModel& model, const DeltaKDfa& dfa,
                             const LabelPartition& part, const CertTemplate& tmpl,
                             const SampleBank& bank, const CegisConfig& cfg);

SynthResult synthesize_b(const SystemModel& model, const DeltaKDfa& dfa,
                         const LabelPartition& part, const CertTemplate& tmpl,
                         const CegisConfig& cfg);

SynthResult synthesize_v(const SystemModel& model, const DeltaKDfa& dfa,
                         const LabelPartition& part, const CertTemplate& tmpl,
                         const std::optional<VDomainInfo>& vdom,
                         const CegisConfig& cfg);

// Latin-hypercube samples over a box (deterministic in the seed).
std::vector<std::vector<double>> latin_hypercube(const Box& box, std::size_t count,
                                                 std::uint64_t seed);

}  // namespace diagcert

#endif
