#ifndef PERCLOUD_LOSSES_HPP
#define PERCLOUD_LOSSES_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "percloud/aggregate.hpp"
#include "percloud/point_cloud.hpp"

namespace percloud {

struct LossConfig {
  double mu = 0.1;
  double lambda = 0.1;
  double eps_norm = 1e-12;    // stabilizer inside Euclidean norms
  double eps_degree = 1e-12;  // terms with degree <= this are dropped

  void validate() const {
    if (mu < 0.0 || lambda < 0.0)
      throw BadParams("mu and lambda must be non-negative");
    if (eps_norm <= 0.0 || eps_degree <= 0.0)
      throw BadParams("eps values must be positive");
  }
};

struct LossTerm {
  double value = 0.0;
  Matrix grad;  // w.r.t. fhat
};

// sum_ij W_ij * || fhat_i / sqrt(d_i) - fhat_j / sqrt(d_j) ||, with
// d_i = sum_l W_il and each norm stabilized as sqrt(||.||^2 + eps^2).
// Terms touching a degree <= eps_degree are excluded. The gradient is exact
// for the stabilized objective (degrees do not depend on fhat).
LossTerm smoothness_loss(const Matrix& fhat, const SparseMatrix& w,
                         double eps_norm = 1e-12, double eps_degree = 1e-12);

// sum_i || fhat_i - forig_i ||, same stabilization.
LossTerm regularization_loss(const Matrix& fhat, const Matrix& forig,
                             double eps_norm = 1e-12);

double total_loss(double l_con, double l_pred, double lambda);

struct LossReport {
  double l_smt = 0.0;
  double l_reg = 0.0;
  double l_con = 0.0;
  double l_pred = 0.0;
  double l_total = 0.0;
  Matrix grad_fhat;  // gradient of l_con
};

// l_con = l_smt + mu * l_reg over the symmetrized adjacency; l_total folds in
// the caller's task loss via lambda.
LossReport consensus_loss(const Matrix& fhat, const Matrix& forig,
                          const SparseMatrix& w_symmetric,
                          const LossConfig& cfg, double l_pred = 0.0);

// Reference task-loss plug-in: mean per-token cross-entropy over logits
// (rows = tokens, cols = classes), computed with max-subtracted log-sum-exp.
double cross_entropy_loss(const Matrix& logits,
                          const std::vector<int>& targets);

// Key=value text lines; provenance becomes a leading comment when non-empty.
void write_loss_report(const LossReport& report, const std::string& path,
                       const std::string& provenance = "");

// Evaluates value and analytic gradient at a point.
using LossFn = std::function<std::pair<double, Matrix>(const Matrix&)>;

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  Eigen::Index worst_row = -1;
  Eigen::Index worst_col = -1;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool pass = false;
};

// Central differences per coordinate against the analytic gradient, relative
// error |a - n| / (|a| + |n| + tiny), where tiny absorbs the cancellation
// floor eps |f| / (2 h tol) of the difference quotient. `skip(i, j)` excludes
// coordinates (e.g. those near a norm's non-smooth point).
FiniteDiffReport finite_diff_check(
    const LossFn& fn, const Matrix& point, double h, double tol,
    const std::function<bool(Eigen::Index, Eigen::Index)>& skip = {});

}  // namespace percloud

#endif
