#include "carbon/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace carbon::lp {

int Problem::add_variable(double objective, double lower, double upper) {
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  cols_.emplace_back();
  return static_cast<int>(objective_.size()) - 1;
}

void Problem::add_entry(int var, int row, double value) {
  if (value == 0.0) return;
  cols_[var].push_back({row, value});
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeAtZero };

class Simplex {
 public:
  Simplex(const Problem& p, const Options& opt)
      : p_(p),
        opt_(opt),
        m_(p.num_rows()),
        n_(p.num_vars()),
        total_(p.num_vars() + p.num_rows()) {
    lower_.assign(p.lower().begin(), p.lower().end());
    upper_.assign(p.upper().begin(), p.upper().end());
    cost_.assign(total_, 0.0);
    x_.assign(total_, 0.0);
    state_.assign(total_, VarState::AtLower);
    basis_.assign(m_, -1);
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
  }

  Solution run() {
    setup_phase1();
    Status st = iterate();
    if (st != Status::Optimal) return finish(st);
    double infeas = phase1_infeasibility();
    double scale = 1.0;
    for (double b : p_.rhs()) scale = std::max(scale, std::abs(b));
    if (infeas > 1e-7 * scale) return finish(Status::Infeasible);
    setup_phase2();
    st = iterate();
    return finish(st);
  }

 private:
  // Artificial variable for row i is variable index n_ + i with column e_i.
  template <typename Fn>
  void for_column(int j, Fn&& fn) const {
    if (j < n_) {
      for (const auto& e : p_.column(j)) fn(e.row, e.value);
    } else {
      fn(j - n_, 1.0);
    }
  }

  void setup_phase1() {
    // Nonbasic structural variables start at the finite bound closest to
    // zero; free variables sit at zero. Artificials absorb the residual.
    for (int j = 0; j < n_; ++j) {
      double lo = lower_[j], hi = upper_[j];
      if (std::isfinite(lo) && std::isfinite(hi)) {
        x_[j] = std::abs(lo) <= std::abs(hi) ? lo : hi;
        state_[j] = x_[j] == lo ? VarState::AtLower : VarState::AtUpper;
      } else if (std::isfinite(lo)) {
        x_[j] = lo;
        state_[j] = VarState::AtLower;
      } else if (std::isfinite(hi)) {
        x_[j] = hi;
        state_[j] = VarState::AtUpper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::FreeAtZero;
      }
    }
    std::vector<double> residual(p_.rhs());
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (const auto& e : p_.column(j)) residual[e.row] -= e.value * x_[j];
    }
    lower_.resize(total_);
    upper_.resize(total_);
    for (int i = 0; i < m_; ++i) {
      int a = n_ + i;
      double r = residual[i];
      x_[a] = r;
      if (r >= 0.0) {
        lower_[a] = 0.0;
        upper_[a] = kInf;
        cost_[a] = -1.0;
      } else {
        lower_[a] = -kInf;
        upper_[a] = 0.0;
        cost_[a] = 1.0;
      }
      state_[a] = VarState::Basic;
      basis_[i] = a;
      binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
    }
  }

  double phase1_infeasibility() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      int b = basis_[i];
      if (b >= n_) s += std::abs(x_[b]);
    }
    for (int j = n_; j < total_; ++j)
      if (state_[j] != VarState::Basic) s += std::abs(x_[j]);
    return s;
  }

  void setup_phase2() {
    // Pin artificials to zero and install the real objective. A basic
    // artificial at value zero may stay in the basis (redundant row).
    for (int i = 0; i < m_; ++i) {
      int a = n_ + i;
      lower_[a] = 0.0;
      upper_[a] = 0.0;
      cost_[a] = 0.0;
      if (state_[a] != VarState::Basic) {
        x_[a] = 0.0;
        state_[a] = VarState::AtLower;
      }
    }
    for (int j = 0; j < n_; ++j) cost_[j] = p_.objective()[j];
    refactorize();
  }

  Status iterate() {
    int stall = 0;
    bool bland = false;
    int since_refactor = 0;
    while (true) {
      if (iterations_ >= opt_.max_iterations) return Status::IterationLimit;
      compute_duals();
      int entering = -1;
      double best = 0.0;
      int dir = 0;
      for (int j = 0; j < total_; ++j) {
        VarState s = state_[j];
        if (s == VarState::Basic) continue;
        if (lower_[j] == upper_[j]) continue;  // fixed
        double d = reduced_cost(j);
        double score = 0.0;
        int cand_dir = 0;
        if (s == VarState::AtLower || s == VarState::FreeAtZero) {
          if (d > opt_.optimality_tol) {
            score = d;
            cand_dir = +1;
          }
        }
        if (cand_dir == 0 && (s == VarState::AtUpper || s == VarState::FreeAtZero)) {
          if (d < -opt_.optimality_tol) {
            score = -d;
            cand_dir = -1;
          }
        }
        if (cand_dir == 0) continue;
        if (bland) {
          entering = j;
          dir = cand_dir;
          break;
        }
        if (score > best) {
          best = score;
          entering = j;
          dir = cand_dir;
        }
      }
      if (entering < 0) return Status::Optimal;

      // w = B^-1 A_j
      w_.assign(m_, 0.0);
      for_column(entering, [&](int row, double v) {
        for (int k = 0; k < m_; ++k)
          w_[k] += binv_[static_cast<size_t>(k) * m_ + row] * v;
      });

      // Ratio test: entering moves by t in direction `dir`; basic variable k
      // moves by -dir * t * w_k.
      const double piv_tol = 1e-9;
      double t_max = upper_[entering] - lower_[entering];  // bound flip span
      if (!std::isfinite(t_max)) t_max = kInf;
      double t = t_max;
      int leave_row = -1;
      double leave_pivot = 0.0;
      bool leave_to_upper = false;
      for (int k = 0; k < m_; ++k) {
        double step = dir * w_[k];
        int b = basis_[k];
        double tk = kInf;
        bool to_upper = false;
        if (step > piv_tol) {
          if (std::isfinite(lower_[b])) tk = (x_[b] - lower_[b]) / step;
        } else if (step < -piv_tol) {
          if (std::isfinite(upper_[b])) {
            tk = (upper_[b] - x_[b]) / (-step);
            to_upper = true;
          }
        } else {
          continue;
        }
        if (tk < 0.0) tk = 0.0;
        if (tk < t - 1e-10 ||
            (tk < t + 1e-10 && std::abs(w_[k]) > std::abs(leave_pivot))) {
          t = tk;
          leave_row = k;
          leave_pivot = w_[k];
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(t)) return Status::Unbounded;

      ++iterations_;
      if (t <= 1e-12) {
        if (++stall > 400) bland = true;
      } else {
        stall = 0;
        bland = false;
      }

      // Apply the step.
      for (int k = 0; k < m_; ++k) x_[basis_[k]] -= dir * t * w_[k];
      x_[entering] += dir * t;

      if (leave_row < 0) {
        // Bound-to-bound flip, basis unchanged.
        state_[entering] =
            dir > 0 ? VarState::AtUpper : VarState::AtLower;
        x_[entering] = dir > 0 ? upper_[entering] : lower_[entering];
      } else {
        int leaving = basis_[leave_row];
        x_[leaving] = leave_to_upper ? upper_[leaving] : lower_[leaving];
        state_[leaving] =
            leave_to_upper ? VarState::AtUpper : VarState::AtLower;
        basis_[leave_row] = entering;
        state_[entering] = VarState::Basic;
        update_inverse(leave_row);
        if (++since_refactor >= opt_.refactor_interval) {
          refactorize();
          since_refactor = 0;
        }
      }
    }
  }

  void compute_duals() {
    y_.assign(m_, 0.0);
    for (int k = 0; k < m_; ++k) {
      double cb = cost_[basis_[k]];
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<size_t>(k) * m_];
      for (int i = 0; i < m_; ++i) y_[i] += cb * row[i];
    }
  }

  double reduced_cost(int j) const {
    double d = cost_[j];
    for_column(j, [&](int row, double v) { d -= y_[row] * v; });
    return d;
  }

  void update_inverse(int r) {
    double alpha = w_[r];
    double* row_r = &binv_[static_cast<size_t>(r) * m_];
    for (int i = 0; i < m_; ++i) row_r[i] /= alpha;
    for (int k = 0; k < m_; ++k) {
      if (k == r) continue;
      double f = w_[k];
      if (f == 0.0) continue;
      double* row_k = &binv_[static_cast<size_t>(k) * m_];
      for (int i = 0; i < m_; ++i) row_k[i] -= f * row_r[i];
    }
  }

  void refactorize() {
    // Rebuild B^-1 by Gauss-Jordan elimination with partial pivoting, then
    // recompute basic values from the nonbasic ones.
    std::vector<double> mat(static_cast<size_t>(m_) * 2 * m_, 0.0);
    int w2 = 2 * m_;
    for (int k = 0; k < m_; ++k) {
      for_column(basis_[k], [&](int row, double v) {
        mat[static_cast<size_t>(row) * w2 + k] = v;
      });
      mat[static_cast<size_t>(k) * w2 + m_ + k] = 1.0;
    }
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      double best = std::abs(mat[static_cast<size_t>(col) * w2 + col]);
      for (int r = col + 1; r < m_; ++r) {
        double v = std::abs(mat[static_cast<size_t>(r) * w2 + col]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-12)
        throw std::runtime_error("singular basis during refactorization");
      if (piv != col)
        for (int i = 0; i < w2; ++i)
          std::swap(mat[static_cast<size_t>(piv) * w2 + i],
                    mat[static_cast<size_t>(col) * w2 + i]);
      double* prow = &mat[static_cast<size_t>(col) * w2];
      double inv = 1.0 / prow[col];
      for (int i = 0; i < w2; ++i) prow[i] *= inv;
      for (int r = 0; r < m_; ++r) {
        if (r == col) continue;
        double f = mat[static_cast<size_t>(r) * w2 + col];
        if (f == 0.0) continue;
        double* rrow = &mat[static_cast<size_t>(r) * w2];
        for (int i = 0; i < w2; ++i) rrow[i] -= f * prow[i];
      }
    }
    for (int k = 0; k < m_; ++k)
      for (int i = 0; i < m_; ++i)
        binv_[static_cast<size_t>(k) * m_ + i] =
            mat[static_cast<size_t>(k) * w2 + m_ + i];

    std::vector<double> rhs(p_.rhs());
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      for_column(j, [&](int row, double v) { rhs[row] -= v * x_[j]; });
    }
    for (int k = 0; k < m_; ++k) {
      double v = 0.0;
      const double* row = &binv_[static_cast<size_t>(k) * m_];
      for (int i = 0; i < m_; ++i) v += row[i] * rhs[i];
      x_[basis_[k]] = v;
    }
  }

  Solution finish(Status st) {
    refactorize();
    compute_duals();
    Solution sol;
    sol.status = st;
    sol.iterations = iterations_;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.row_duals = y_;
    sol.reduced_costs.resize(n_);
    for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = reduced_cost(j);
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += p_.objective()[j] * sol.x[j];
    sol.objective = obj;
    return sol;
  }

  const Problem& p_;
  Options opt_;
  int m_, n_, total_;
  std::vector<double> lower_, upper_, cost_, x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  std::vector<double> binv_;  // row-major m x m
  std::vector<double> y_, w_;
  int iterations_ = 0;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  Simplex s(problem, options);
  return s.run();
}

}  // namespace carbon::lp
