#include "windbid/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <Eigen/SparseLU>

#include "windbid/errors.hpp"

namespace windbid {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

void LpStandardForm::validate() const {
  const auto m = static_cast<std::size_t>(rows());
  const auto n = static_cast<std::size_t>(cols());
  if (rhs.size() != m || row_sense.size() != m)
    throw DimensionMismatch("LP row vectors do not match matrix rows");
  if (lower.size() != n || upper.size() != n || objective.size() != n)
    throw DimensionMismatch("LP column vectors do not match matrix columns");
  if (!row_labels.empty() && row_labels.size() != m)
    throw DimensionMismatch("LP row label count does not match matrix rows");
  if (!col_labels.empty() && col_labels.size() != n)
    throw DimensionMismatch("LP column label count does not match matrix columns");
  for (std::size_t j = 0; j < n; ++j) {
    if (lower[j] > upper[j]) throw DimensionMismatch("LP column " + std::to_string(j) + " has lower > upper");
    if (std::isnan(objective[j])) throw DimensionMismatch("LP objective has NaN");
  }
}

double max_violation(const LpStandardForm& lp, const std::vector<double>& x) {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd ax = lp.matrix * xv;
  double worst = 0.0;
  for (int i = 0; i < lp.rows(); ++i) {
    const double r = ax[i] - lp.rhs[i];
    double v = 0.0;
    switch (lp.row_sense[i]) {
      case RowSense::Equal: v = std::abs(r); break;
      case RowSense::LessEqual: v = std::max(r, 0.0); break;
      case RowSense::GreaterEqual: v = std::max(-r, 0.0); break;
    }
    worst = std::max(worst, v);
  }
  for (int j = 0; j < lp.cols(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  return worst;
}

namespace {

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, Free };

struct Column {
  std::vector<int> index;
  std::vector<double> value;
};

struct Eta {
  int row;
  double pivot;
  std::vector<int> index;  // off-pivot nonzeros of the entering column
  std::vector<double> value;
};

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RevisedSimplex {
 public:
  RevisedSimplex(const LpStandardForm& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    m_ = lp.rows();
    n_struct_ = lp.cols();
    build_columns();
  }

  LpResult run() {
    LpResult result;

    // Phase 1: maximize -(sum of artificials).
    std::vector<double> cost1(static_cast<std::size_t>(total_), 0.0);
    for (int j = art_begin_; j < total_; ++j) cost1[j] = -1.0;
    const auto phase1 = iterate(cost1, /*phase_one=*/true);
    if (phase1 == Outcome::Unbounded) throw NumericalFailure("phase 1 reported unbounded");

    double infeas = 0.0;
    for (int j = art_begin_; j < total_; ++j) infeas += x_[j];
    double bnorm = 0.0;
    for (double b : lp_.rhs) bnorm = std::max(bnorm, std::abs(b));
    result.iterations = iterations_;
    if (infeas > opt_.feasibility_tol * (1.0 + bnorm)) {
      result.status = SolveStatus::Infeasible;
      result.used_bland = used_bland_;
      return result;
    }

    // Phase 2: artificials pinned to zero.
    for (int j = art_begin_; j < total_; ++j) {
      hi_[j] = 0.0;
      if (state_[j] != VarState::Basic) {
        state_[j] = VarState::AtLower;
        x_[j] = 0.0;
      }
    }
    std::vector<double> cost2(static_cast<std::size_t>(total_), 0.0);
    const double sign = lp_.sense == ObjectiveSense::Maximize ? 1.0 : -1.0;
    for (int j = 0; j < n_struct_; ++j) cost2[j] = sign * lp_.objective[j];
    const auto phase2 = iterate(cost2, /*phase_one=*/false);

    result.iterations = iterations_;
    result.used_bland = used_bland_;
    if (phase2 == Outcome::Unbounded) {
      result.status = SolveStatus::Unbounded;
      return result;
    }

    refactor();
    result.status = SolveStatus::Optimal;
    result.x.assign(x_.begin(), x_.begin() + n_struct_);
    double obj = 0.0;
    for (int j = 0; j < n_struct_; ++j) obj += lp_.objective[j] * result.x[j];
    result.objective = obj;
    result.max_constraint_violation = max_violation(lp_, result.x);
    return result;
  }

 private:
  enum class Outcome { Optimal, Unbounded };

  void build_columns() {
    int n_slack = 0;
    for (auto s : lp_.row_sense)
      if (s != RowSense::Equal) ++n_slack;
    slack_begin_ = n_struct_;
    art_begin_ = n_struct_ + n_slack;
    total_ = art_begin_ + m_;

    cols_.resize(static_cast<std::size_t>(total_));
    lo_.assign(static_cast<std::size_t>(total_), 0.0);
    hi_.assign(static_cast<std::size_t>(total_), kInf);
    for (int j = 0; j < n_struct_; ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(lp_.matrix, j); it; ++it) {
        if (it.value() == 0.0) continue;
        cols_[j].index.push_back(static_cast<int>(it.row()));
        cols_[j].value.push_back(it.value());
      }
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
    }
    int s = slack_begin_;
    for (int i = 0; i < m_; ++i) {
      if (lp_.row_sense[i] == RowSense::Equal) continue;
      cols_[s].index.push_back(i);
      cols_[s].value.push_back(lp_.row_sense[i] == RowSense::LessEqual ? 1.0 : -1.0);
      ++s;
    }

    // Nonbasic starting values, then artificials absorb the residual.
    x_.assign(static_cast<std::size_t>(total_), 0.0);
    state_.assign(static_cast<std::size_t>(total_), VarState::AtLower);
    std::vector<double> residual(lp_.rhs);
    for (int j = 0; j < art_begin_; ++j) {
      if (std::isfinite(lo_[j])) {
        x_[j] = lo_[j];
        state_[j] = VarState::AtLower;
      } else if (std::isfinite(hi_[j])) {
        x_[j] = hi_[j];
        state_[j] = VarState::AtUpper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::Free;
      }
      if (x_[j] != 0.0)
        for (std::size_t k = 0; k < cols_[j].index.size(); ++k) residual[cols_[j].index[k]] -= cols_[j].value[k] * x_[j];
    }
    head_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      const int a = art_begin_ + i;
      cols_[a].index.push_back(i);
      cols_[a].value.push_back(residual[i] >= 0.0 ? 1.0 : -1.0);
      x_[a] = std::abs(residual[i]);
      state_[a] = VarState::Basic;
      head_[i] = a;
    }

    zobrist_.resize(static_cast<std::size_t>(total_));
    basis_hash_ = 0;
    for (int j = 0; j < total_; ++j) zobrist_[j] = splitmix64(static_cast<std::uint64_t>(j));
    for (int i = 0; i < m_; ++i) basis_hash_ ^= zobrist_[head_[i]];
  }

  void refactor() {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m_; ++i) {
      const Column& c = cols_[head_[i]];
      for (std::size_t k = 0; k < c.index.size(); ++k) trip.emplace_back(c.index[k], i, c.value[k]);
    }
    Eigen::SparseMatrix<double> basis(m_, m_);
    basis.setFromTriplets(trip.begin(), trip.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    if (lu_.info() != Eigen::Success) throw NumericalFailure("basis factorization failed: singular basis");
    etas_.clear();

    // x_B = B^{-1} (b - N x_N)
    Eigen::VectorXd rhs(m_);
    for (int i = 0; i < m_; ++i) rhs[i] = lp_.rhs[i];
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      for (std::size_t k = 0; k < cols_[j].index.size(); ++k) rhs[cols_[j].index[k]] -= cols_[j].value[k] * x_[j];
    }
    const Eigen::VectorXd xb = lu_.solve(rhs);
    if (!xb.allFinite()) throw NumericalFailure("basis solve produced non-finite values");
    for (int i = 0; i < m_; ++i) x_[head_[i]] = xb[i];
  }

  Eigen::VectorXd ftran(const Column& col) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
    for (std::size_t k = 0; k < col.index.size(); ++k) a[col.index[k]] = col.value[k];
    Eigen::VectorXd z = lu_.solve(a);
    for (const Eta& e : etas_) {
      const double zr = z[e.row] / e.pivot;
      if (zr != 0.0)
        for (std::size_t k = 0; k < e.index.size(); ++k) z[e.index[k]] -= e.value[k] * zr;
      z[e.row] = zr;
    }
    return z;
  }

  Eigen::VectorXd btran(Eigen::VectorXd v) {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = v[it->row];
      for (std::size_t k = 0; k < it->index.size(); ++k) acc -= v[it->index[k]] * it->value[k];
      v[it->row] = acc / it->pivot;
    }
    return lu_.transpose().solve(v);
  }

  Outcome iterate(const std::vector<double>& cost, bool phase_one) {
    std::unordered_set<std::uint64_t> degenerate_bases;
    bool bland = false;
    refactor();
    for (;;) {
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) refactor();
      if (iterations_ >= opt_.max_iterations) throw NumericalFailure("simplex iteration limit reached");

      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost[head_[i]];
      const Eigen::VectorXd y = btran(cb);

      // Pricing.
      int enter = -1;
      double enter_d = 0.0;
      double best = 0.0;
      for (int j = 0; j < total_; ++j) {
        const VarState st = state_[j];
        if (st == VarState::Basic || lo_[j] == hi_[j]) continue;
        if (j >= art_begin_ && phase_one) continue;  // artificials never re-enter
        double d = cost[j];
        const Column& c = cols_[j];
        for (std::size_t k = 0; k < c.index.size(); ++k) d -= y[c.index[k]] * c.value[k];
        const bool improving = (st == VarState::AtLower && d > opt_.optimality_tol) ||
                               (st == VarState::AtUpper && d < -opt_.optimality_tol) ||
                               (st == VarState::Free && std::abs(d) > opt_.optimality_tol);
        if (!improving) continue;
        if (bland) {
          enter = j;
          enter_d = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          enter_d = d;
        }
      }
      if (enter < 0) return Outcome::Optimal;

      const Eigen::VectorXd alpha = ftran(cols_[enter]);
      const double dir = enter_d > 0.0 ? 1.0 : -1.0;

      // Harris two-pass ratio test (Bland mode: exact ties by smallest index).
      const double tol = opt_.feasibility_tol;
      double relaxed = kInf;
      for (int i = 0; i < m_; ++i) {
        const double delta = -dir * alpha[i];
        if (std::abs(delta) < opt_.pivot_tol) continue;
        const int b = head_[i];
        double t = kInf;
        if (delta < 0.0 && std::isfinite(lo_[b])) t = (x_[b] - lo_[b] + (bland ? 0.0 : tol)) / -delta;
        if (delta > 0.0 && std::isfinite(hi_[b])) t = (hi_[b] - x_[b] + (bland ? 0.0 : tol)) / delta;
        relaxed = std::min(relaxed, t);
      }
      int leave = -1;
      double step = kInf;
      double leave_mag = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double delta = -dir * alpha[i];
        if (std::abs(delta) < opt_.pivot_tol) continue;
        const int b = head_[i];
        double t = kInf;
        if (delta < 0.0 && std::isfinite(lo_[b])) t = (x_[b] - lo_[b]) / -delta;
        if (delta > 0.0 && std::isfinite(hi_[b])) t = (hi_[b] - x_[b]) / delta;
        if (!std::isfinite(t)) continue;
        if (bland) {
          if (t < step - 1e-12 || (t <= step + 1e-12 && leave >= 0 && b < head_[leave])) {
            step = t;
            leave = i;
          }
        } else if (t <= relaxed && std::abs(delta) > leave_mag) {
          leave_mag = std::abs(delta);
          step = t;
          leave = i;
        }
      }
      step = std::max(step, 0.0);
      const double flip = hi_[enter] - lo_[enter];

      if (leave < 0 && !std::isfinite(flip)) return Outcome::Unbounded;
      ++iterations_;

      if (std::isfinite(flip) && flip <= step) {
        // Entering variable runs to its opposite bound; basis unchanged.
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * alpha[i] * flip;
        if (state_[enter] == VarState::AtLower) {
          state_[enter] = VarState::AtUpper;
          x_[enter] = hi_[enter];
        } else {
          state_[enter] = VarState::AtLower;
          x_[enter] = lo_[enter];
        }
        degenerate_bases.clear();
        bland = false;
        continue;
      }

      for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * alpha[i] * step;
      x_[enter] += dir * step;
      const int out = head_[leave];
      if (-dir * alpha[leave] < 0.0) {
        x_[out] = lo_[out];
        state_[out] = VarState::AtLower;
      } else {
        x_[out] = hi_[out];
        state_[out] = VarState::AtUpper;
      }
      state_[enter] = VarState::Basic;
      head_[leave] = enter;
      basis_hash_ ^= zobrist_[out] ^ zobrist_[enter];

      Eta eta{leave, alpha[leave], {}, {}};
      for (int i = 0; i < m_; ++i) {
        if (i == leave || alpha[i] == 0.0) continue;
        eta.index.push_back(i);
        eta.value.push_back(alpha[i]);
      }
      etas_.push_back(std::move(eta));

      if (step <= 1e-12) {
        if (!degenerate_bases.insert(basis_hash_).second) {
          bland = true;
          used_bland_ = true;
        }
      } else {
        degenerate_bases.clear();
        bland = false;
      }
    }
  }

  const LpStandardForm& lp_;
  SimplexOptions opt_;
  int m_ = 0;
  int n_struct_ = 0;
  int slack_begin_ = 0;
  int art_begin_ = 0;
  int total_ = 0;
  std::vector<Column> cols_;
  std::vector<double> lo_, hi_, x_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<std::uint64_t> zobrist_;
  std::uint64_t basis_hash_ = 0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  long iterations_ = 0;
  bool used_bland_ = false;
};

}  // namespace

LpResult solve_lp(const LpStandardForm& lp, const SimplexOptions& options) {
  lp.validate();
  if (lp.rows() == 0) {
    // Bounds only: each column sits at whichever bound its cost prefers.
    LpResult r;
    r.status = SolveStatus::Optimal;
    r.x.resize(static_cast<std::size_t>(lp.cols()));
    const double sign = lp.sense == ObjectiveSense::Maximize ? 1.0 : -1.0;
    double obj = 0.0;
    for (int j = 0; j < lp.cols(); ++j) {
      const double c = sign * lp.objective[j];
      double v = 0.0;
      if (c > 0.0) v = lp.upper[j];
      else if (c < 0.0) v = lp.lower[j];
      else v = std::isfinite(lp.lower[j]) ? lp.lower[j] : (std::isfinite(lp.upper[j]) ? lp.upper[j] : 0.0);
      if (!std::isfinite(v)) {
        r.status = SolveStatus::Unbounded;
        r.x.clear();
        return r;
      }
      r.x[j] = v;
      obj += lp.objective[j] * v;
    }
    r.objective = obj;
    return r;
  }
  RevisedSimplex solver(lp, options);
  return solver.run();
}

void write_lp_debug(const LpStandardForm& lp, std::ostream& out) {
  const auto label = [&](int i) { return lp.row_labels.empty() ? "r" + std::to_string(i) : lp.row_labels[i]; };
  const auto col_label = [&](int j) { return lp.col_labels.empty() ? "x" + std::to_string(j) : lp.col_labels[j]; };
  Eigen::SparseMatrix<double, Eigen::RowMajor> rows = lp.matrix;
  out << (lp.sense == ObjectiveSense::Maximize ? "max" : "min") << " objective |";
  for (int j = 0; j < lp.cols(); ++j)
    if (lp.objective[j] != 0.0) out << ' ' << std::setprecision(10) << lp.objective[j] << '*' << col_label(j);
  out << '\n';
  for (int i = 0; i < lp.rows(); ++i) {
    std::ostringstream coeffs;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, i); it; ++it)
      coeffs << ' ' << std::setprecision(10) << it.value() << '*' << col_label(static_cast<int>(it.col()));
    const char* sense = lp.row_sense[i] == RowSense::Equal ? "=" : (lp.row_sense[i] == RowSense::LessEqual ? "<=" : ">=");
    out << std::left << std::setw(24) << label(i) << " |" << std::setw(60) << coeffs.str() << " | " << sense << ' '
        << std::setprecision(10) << lp.rhs[i] << '\n';
  }
  for (int j = 0; j < lp.cols(); ++j)
    out << std::left << std::setw(24) << col_label(j) << " | bounds [" << lp.lower[j] << ", " << lp.upper[j] << "]\n";
}

}  // namespace windbid
