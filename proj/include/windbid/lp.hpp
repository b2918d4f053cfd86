#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

namespace windbid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { Equal, LessEqual, GreaterEqual };
enum class ObjectiveSense { Maximize, Minimize };
enum class SolveStatus { Optimal, Infeasible, Unbounded };

const char* to_string(SolveStatus status);

// A linear program with general rows and bounded columns:
//   opt  c'x   s.t.  A x (sense) b,  lower <= x <= upper.
struct LpStandardForm {
  Eigen::SparseMatrix<double> matrix;  // rows x cols, column major
  std::vector<double> rhs;
  std::vector<RowSense> row_sense;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> objective;
  ObjectiveSense sense = ObjectiveSense::Maximize;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }

  // Throws DimensionMismatch when the vectors disagree with the matrix shape
  // or a bound pair is inverted.
  void validate() const;
};

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-9;
  int refactor_interval = 64;
  long max_iterations = 200000;
};

struct LpResult {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x;
  long iterations = 0;
  double max_constraint_violation = 0.0;
  bool used_bland = false;
};

// Two-phase bounded-variable revised simplex. The basis is held as a sparse
// LU factorization plus a product-form eta file, refactorized periodically.
// Pricing is Dantzig; when a degenerate pivot revisits a basis the solver
// switches to Bland's smallest-index rule until the objective moves again.
// Throws NumericalFailure on a singular basis or iteration exhaustion.
LpResult solve_lp(const LpStandardForm& lp, const SimplexOptions& options = {});

// Largest violation of rows and bounds by x (absolute).
double max_violation(const LpStandardForm& lp, const std::vector<double>& x);

// Fixed-width "row label | coefficients | rhs" dump, for inspection only.
void write_lp_debug(const LpStandardForm& lp, std::ostream& out);

}  // namespace windbid
