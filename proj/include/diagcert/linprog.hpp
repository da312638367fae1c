#ifndef DIAGCERT_LINPROG_HPP
#define DIAGCERT_LINPROG_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace diagcert {

struct SparseRow {
  std::vector<std::pair<std::uint32_t, double>> entries;  // (coeff index, value)
};

struct MarginLpResult {
  enum class Status { Optimal, IterationLimit } status = Status::Optimal;
  std::vector<double> coeffs;
  double margin = 0.0;          // optimal shared slack t*
  double dual_objective = 0.0;  // equals margin at a clean optimum
  std::size_t iterations = 0;
};

// Maximize t subject to
//     rows[i] . c + t <= rhs[i]   for every row,
//     |c_j| <= coeff_bound,  |t| <= t_bound.
//
// Revised simplex applied to the dual, whose basis has side n+1 regardless of
// the row count, so large sample banks stay cheap. Rows should be pre-scaled
// by the caller (the slack t is shared, so row scaling defines its meaning).
// The problem is always feasible (c = 0, t = -t_bound), hence an optimum
// exists whenever t_bound < infinity.
MarginLpResult solve_margin_lp(const std::vector<SparseRow>& rows,
                               const std::vector<double>& rhs,
                               std::size_t num_coeffs, double coeff_bound,
                               double t_bound = 1e6,
                               std::size_t max_iterations = 200000);

}  // namespace diagcert

#endif
