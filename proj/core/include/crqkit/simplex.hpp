#pragma once

#include <Eigen/Dense>

#include <vector>

namespace crqkit {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::optimal;
  Eigen::VectorXd x;
  double objective = 0.0;
  std::vector<int> basis;  // basic column index per row
  long iterations = 0;
};

// Solves  min c'x  subject to  a x = b, x >= 0  with a dense two-phase
// primal simplex. Rows are equilibrated before solving; unit columns are
// used as a crash basis so phase one only touches rows without one.
// Pricing is most-negative reduced cost, switching to Bland's rule after a
// run of degenerate pivots, which guarantees termination. Feasibility
// tolerance is 1e-9 after row scaling, optimality 1e-10 on reduced costs.
LpSolution solve_lp(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c);

}  // namespace crqkit
