#include "crqkit/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crqkit {

namespace {

constexpr double kOptTol = 1e-10;    // reduced-cost optimality
constexpr double kFeasTol = 1e-9;    // per-row feasibility after scaling
constexpr double kPivotTol = 1e-11;  // smallest admissible pivot element
constexpr int kDegenerateRun = 60;   // stalled pivots before Bland's rule
constexpr long kMaxIterations = 1000000;

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

LpSolution solve_lp(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());

  // Equilibrate rows, then flip signs so every right-hand side is >= 0.
  for (int i = 0; i < m; ++i) {
    const double scale = std::max(a.row(i).cwiseAbs().maxCoeff(), std::abs(b(i)));
    if (scale > 0.0) {
      a.row(i) /= scale;
      b(i) /= scale;
    }
    if (b(i) < 0.0) {
      a.row(i) = -a.row(i);
      b(i) = -b(i);
    }
  }

  // Crash basis: any column whose single nonzero entry is positive starts
  // basic in its row. The u/v columns of check-loss programs cover every
  // residual row this way, leaving phase one almost nothing to do.
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  {
    std::vector<int> nonzeros(static_cast<std::size_t>(n), 0);
    std::vector<int> row_of(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (a(i, j) != 0.0) {
          ++nonzeros[static_cast<std::size_t>(j)];
          row_of[static_cast<std::size_t>(j)] = i;
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      if (nonzeros[static_cast<std::size_t>(j)] == 1) {
        const int i = row_of[static_cast<std::size_t>(j)];
        if (basis[static_cast<std::size_t>(i)] < 0 && a(i, j) > 0.0) {
          basis[static_cast<std::size_t>(i)] = j;
        }
      }
    }
  }

  int num_artificial = 0;
  for (int i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < 0) ++num_artificial;
  }
  const int total = n + num_artificial;

  // Rows 0..m-1 hold the constraints, row m the phase-two reduced costs,
  // row m+1 the phase-one costs. Last column is the right-hand side.
  Tableau t = Tableau::Zero(m + 2, total + 1);
  if (m > 0 && n > 0) t.block(0, 0, m, n) = a;
  for (int i = 0; i < m; ++i) t(i, total) = b(i);
  {
    int next = n;
    for (int i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] < 0) {
        t(i, next) = 1.0;
        basis[static_cast<std::size_t>(i)] = next;
        ++next;
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    const double piv = t(i, basis[static_cast<std::size_t>(i)]);
    if (piv != 1.0) t.row(i) /= piv;
  }

  t.row(m).head(n) = c.transpose();
  for (int j = n; j < total; ++j) t(m + 1, j) = 1.0;
  for (int i = 0; i < m; ++i) {
    const int j = basis[static_cast<std::size_t>(i)];
    if (t(m, j) != 0.0) t.row(m) -= t(m, j) * t.row(i);
    if (t(m + 1, j) != 0.0) t.row(m + 1) -= t(m + 1, j) * t.row(i);
  }

  LpSolution sol;
  long iterations = 0;

  auto pivot = [&](int pr, int pc) {
    t.row(pr) /= t(pr, pc);
    for (int i = 0; i < m + 2; ++i) {
      if (i == pr) continue;
      const double f = t(i, pc);
      if (f != 0.0) t.row(i) -= f * t.row(pr);
    }
    basis[static_cast<std::size_t>(pr)] = pc;
  };

  enum class LoopResult { optimal, unbounded, iteration_limit };

  // Entering columns are restricted to j < limit (phase two bars the
  // artificials). Ratio ties always break on the smallest leaving basis
  // index; entering switches from Dantzig to Bland after a degenerate run.
  auto optimize = [&](int cr, int limit) -> LoopResult {
    bool bland = false;
    int stalled = 0;
    double last_objective = t(cr, total);
    while (true) {
      if (++iterations > kMaxIterations) return LoopResult::iteration_limit;

      int pc = -1;
      if (bland) {
        for (int j = 0; j < limit; ++j) {
          if (t(cr, j) < -kOptTol) {
            pc = j;
            break;
          }
        }
      } else {
        double best = -kOptTol;
        for (int j = 0; j < limit; ++j) {
          if (t(cr, j) < best) {
            best = t(cr, j);
            pc = j;
          }
        }
      }
      if (pc < 0) return LoopResult::optimal;

      int pr = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < m; ++i) {
        const double aij = t(i, pc);
        if (aij <= kPivotTol) continue;
        const double ratio = t(i, total) / aij;
        const double tie = 1e-12 * (1.0 + std::abs(best_ratio));
        if (pr < 0 || ratio < best_ratio - tie) {
          best_ratio = ratio;
          pr = i;
        } else if (ratio <= best_ratio + tie &&
                   basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(pr)]) {
          pr = i;
        }
      }
      if (pr < 0) return LoopResult::unbounded;

      pivot(pr, pc);

      const double objective = t(cr, total);
      if (objective > last_objective + 1e-14 * (1.0 + std::abs(last_objective))) {
        last_objective = objective;
        stalled = 0;
        bland = false;
      } else if (++stalled >= kDegenerateRun) {
        bland = true;
      }
    }
  };

  if (num_artificial > 0) {
    const LoopResult r = optimize(m + 1, total);
    if (r == LoopResult::iteration_limit) {
      sol.status = LpStatus::iteration_limit;
      return sol;
    }
    const double infeasibility = -t(m + 1, total);
    if (infeasibility > kFeasTol * std::max(1, m)) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    // Swap any artificial still basic (at zero) for a structural column;
    // rows with no eligible column are redundant and keep it at zero.
    for (int i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] >= n) {
        for (int j = 0; j < n; ++j) {
          if (std::abs(t(i, j)) > 1e-7) {
            pivot(i, j);
            break;
          }
        }
      }
    }
  }

  const LoopResult r = optimize(m, n);
  if (r == LoopResult::iteration_limit) {
    sol.status = LpStatus::iteration_limit;
    return sol;
  }
  if (r == LoopResult::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }

  sol.status = LpStatus::optimal;
  sol.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int j = basis[static_cast<std::size_t>(i)];
    if (j < n) sol.x(j) = std::max(0.0, t(i, total));
  }
  sol.objective = c.dot(sol.x);
  sol.basis = basis;
  sol.iterations = iterations;
  return sol;
}

}  // namespace crqkit
