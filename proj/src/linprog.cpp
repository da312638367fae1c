#include "diagcert/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace diagcert {

namespace {

// Dual of the margin LP in standard form:
//   min  b'y + u'w+ - l'w-   s.t.  G'y + w+ - w- = d,  y, w+, w- >= 0,
// where G = [A | 1], d = e_t. Column ids: [0,m) -> y_i, [m, m+N) -> w+_j,
// [m+N, m+2N) -> w-_j. The simplex multipliers pi at optimality are the
// primal solution z = (c, t).
class DualSimplex {
 public:
  DualSimplex(const std::vector<SparseRow>& rows, const std::vector<double>& rhs,
              std::size_t n, double cbound, double tbound)
      : rows_(rows), rhs_(rhs), n_(n), N_(n + 1), m_(rows.size()),
        cbound_(cbound), tbound_(tbound) {
    basis_.resize(N_);
    for (std::size_t j = 0; j < N_; ++j) basis_[j] = colid_wplus(j);
    binv_.assign(N_ * N_, 0.0);
    for (std::size_t j = 0; j < N_; ++j) binv_[j * N_ + j] = 1.0;
  }

  std::size_t colid_y(std::size_t i) const { return i; }
  std::size_t colid_wplus(std::size_t j) const { return m_ + j; }
  std::size_t colid_wminus(std::size_t j) const { return m_ + N_ + j; }

  double upper(std::size_t j) const { return j < n_ ? cbound_ : tbound_; }
  double lower(std::size_t j) const { return j < n_ ? -cbound_ : -tbound_; }

  double cost(std::size_t col) const {
    if (col < m_) return rhs_[col];
    if (col < m_ + N_) return upper(col - m_);
    return -lower(col - m_ - N_);
  }

  // Dense column of the constraint matrix.
  void column(std::size_t col, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (col < m_) {
      for (auto& [j, v] : rows_[col].entries) out[j] = v;
      out[N_ - 1] = 1.0;  // shared slack coefficient
    } else if (col < m_ + N_) {
      out[col - m_] = 1.0;
    } else {
      out[col - m_ - N_] = -1.0;
    }
  }

  double pi_dot_column(const std::vector<double>& pi, std::size_t col) const {
    if (col < m_) {
      double s = pi[N_ - 1];
      for (auto& [j, v] : rows_[col].entries) s += pi[j] * v;
      return s;
    }
    if (col < m_ + N_) return pi[col - m_];
    return -pi[col - m_ - N_];
  }

  MarginLpResult solve(std::size_t max_iterations) {
    MarginLpResult res;
    std::vector<double> xb(N_), pi(N_), w(N_), col(N_);
    const double tol = 1e-9;
    bool bland = false;
    double last_obj = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;

    for (std::size_t iter = 0;; ++iter) {
      if (iter >= max_iterations) {
        res.status = MarginLpResult::Status::IterationLimit;
        res.iterations = iter;
        finish(res, pi);
        return res;
      }
      if (iter % 128 == 0 && iter > 0) refactorize();

      // xb = B^-1 d, d = e_t
      for (std::size_t i = 0; i < N_; ++i) xb[i] = binv_[i * N_ + (N_ - 1)];
      // pi = (c_B B^-1)'
      for (std::size_t j = 0; j < N_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < N_; ++i) s += cost(basis_[i]) * binv_[i * N_ + j];
        pi[j] = s;
      }
      double obj = 0.0;
      for (std::size_t i = 0; i < N_; ++i) obj += cost(basis_[i]) * xb[i];
      if (obj < last_obj - 1e-12) {
        last_obj = obj;
        stall = 0;
      } else if (++stall > 512) {
        bland = true;
      }

      // pricing
      const std::size_t ncols = m_ + 2 * N_;
      std::size_t enter = SIZE_MAX;
      double best = -tol;
      for (std::size_t c = 0; c < ncols; ++c) {
        const double r = cost(c) - pi_dot_column(pi, c);
        if (r < -tol) {
          if (bland) {
            enter = c;
            break;
          }
          if (r < best) {
            best = r;
            enter = c;
          }
        }
      }
      if (enter == SIZE_MAX) {
        res.status = MarginLpResult::Status::Optimal;
        res.iterations = iter;
        res.dual_objective = obj;
        finish(res, pi);
        return res;
      }

      // direction w = B^-1 a_enter
      column(enter, col);
      for (std::size_t i = 0; i < N_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < N_; ++j) s += binv_[i * N_ + j] * col[j];
        w[i] = s;
      }
      // ratio test
      std::size_t leave = SIZE_MAX;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < N_; ++i) {
        if (w[i] > tol) {
          const double ratio = xb[i] / w[i];
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 &&
               (leave == SIZE_MAX || basis_[i] < basis_[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == SIZE_MAX)
        throw std::runtime_error("margin LP: dual unbounded (t_bound too small?)");

      // pivot: replace basis_[leave] by enter, update B^-1 (Gauss-Jordan)
      basis_[leave] = enter;
      const double piv = w[leave];
      for (std::size_t j = 0; j < N_; ++j) binv_[leave * N_ + j] /= piv;
      for (std::size_t i = 0; i < N_; ++i) {
        if (i == leave) continue;
        const double factor = w[i];
        if (factor == 0.0) continue;
        for (std::size_t j = 0; j < N_; ++j)
          binv_[i * N_ + j] -= factor * binv_[leave * N_ + j];
      }
    }
  }

 private:
  void refactorize() {
    // rebuild B^-1 from the basis columns with Gauss-Jordan elimination
    std::vector<double> B(N_ * N_, 0.0), inv(N_ * N_, 0.0), col(N_);
    for (std::size_t c = 0; c < N_; ++c) {
      column(basis_[c], col);
      for (std::size_t r = 0; r < N_; ++r) B[r * N_ + c] = col[r];
    }
    for (std::size_t i = 0; i < N_; ++i) inv[i * N_ + i] = 1.0;
    for (std::size_t c = 0; c < N_; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < N_; ++r)
        if (std::abs(B[r * N_ + c]) > std::abs(B[piv * N_ + c])) piv = r;
      if (std::abs(B[piv * N_ + c]) < 1e-13) return;  // keep the running inverse
      if (piv != c)
        for (std::size_t j = 0; j < N_; ++j) {
          std::swap(B[piv * N_ + j], B[c * N_ + j]);
          std::swap(inv[piv * N_ + j], inv[c * N_ + j]);
        }
      const double d = B[c * N_ + c];
      for (std::size_t j = 0; j < N_; ++j) {
        B[c * N_ + j] /= d;
        inv[c * N_ + j] /= d;
      }
      for (std::size_t r = 0; r < N_; ++r) {
        if (r == c) continue;
        const double f = B[r * N_ + c];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < N_; ++j) {
          B[r * N_ + j] -= f * B[c * N_ + j];
          inv[r * N_ + j] -= f * inv[c * N_ + j];
        }
      }
    }
    binv_ = std::move(inv);
  }

  void finish(MarginLpResult& res, const std::vector<double>& pi) const {
    res.coeffs.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      res.coeffs[j] = std::clamp(pi[j], -cbound_, cbound_);
    // the achieved margin is determined by the coefficients alone
    double t = tbound_;
    for (std::size_t i = 0; i < m_; ++i) {
      double dot = 0.0;
      for (auto& [j, v] : rows_[i].entries) dot += res.coeffs[j] * v;
      t = std::min(t, rhs_[i] - dot);
    }
    res.margin = t;
  }

  const std::vector<SparseRow>& rows_;
  const std::vector<double>& rhs_;
  std::size_t n_, N_, m_;
  double cbound_, tbound_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_;
};

}  // namespace

MarginLpResult solve_margin_lp(const std::vector<SparseRow>& rows,
                               const std::vector<double>& rhs,
                               std::size_t num_coeffs, double coeff_bound,
                               double t_bound, std::size_t max_iterations) {
  if (rows.size() != rhs.size())
    throw std::invalid_argument("margin LP: rows/rhs size mismatch");
  for (auto& r : rows)
    for (auto& [j, v] : r.entries)
      if (j >= num_coeffs) throw std::invalid_argument("margin LP: bad coeff index");
  DualSimplex s(rows, rhs, num_coeffs, coeff_bound, t_bound);
  return s.solve(max_iterations);
}

}  // namespace diagcert
