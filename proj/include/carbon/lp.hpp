#pragma once

#include <limits>
#include <vector>

namespace carbon::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Linear program in computational form:
///   maximize c^T x   subject to   A x = b,   lower <= x <= upper.
/// Columns are stored sparse; inequality rows are modelled by the caller
/// through slack variables.
class Problem {
 public:
  explicit Problem(int num_rows) : num_rows_(num_rows), rhs_(num_rows, 0.0) {}

  int add_variable(double objective, double lower, double upper);
  /// Appends a coefficient to the column of `var`. Each (var, row) pair must
  /// be added at most once.
  void add_entry(int var, int row, double value);
  void set_rhs(int row, double value) { rhs_[row] = value; }
  void set_objective(int var, double value) { objective_[var] = value; }

  int num_rows() const { return num_rows_; }
  int num_vars() const { return static_cast<int>(objective_.size()); }
  const std::vector<double>& rhs() const { return rhs_; }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  struct Entry {
    int row;
    double value;
  };
  const std::vector<Entry>& column(int var) const { return cols_[var]; }

 private:
  int num_rows_;
  std::vector<double> rhs_;
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::vector<Entry>> cols_;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::Optimal;
  double objective = 0.0;
  std::vector<double> x;              // primal values
  std::vector<double> row_duals;      // y, one per row
  std::vector<double> reduced_costs;  // c - y^T A, one per variable
  int iterations = 0;
};

struct Options {
  int max_iterations = 50000;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  int refactor_interval = 128;
};

/// Two-phase bounded-variable revised simplex with a dense basis inverse.
/// Returns a complementary primal/dual pair: basic reduced costs vanish by
/// construction and row duals come from the final basis.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace carbon::lp
