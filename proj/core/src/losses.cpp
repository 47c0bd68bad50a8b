#include "percloud/losses.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace percloud {

LossTerm smoothness_loss(const Matrix& fhat, const SparseMatrix& w,
                         double eps_norm, double eps_degree) {
  const Eigen::Index m = fhat.rows();
  if (w.rows() != m || w.cols() != m)
    throw ShapeMismatch("adjacency is " + std::to_string(w.rows()) + "x" +
                        std::to_string(w.cols()) + ", features have " +
                        std::to_string(m) + " rows");

  Vector degree = Vector::Zero(m);
  for (int o = 0; o < w.outerSize(); ++o)
    for (SparseMatrix::InnerIterator it(w, o); it; ++it)
      degree(it.row()) += it.value();

  Vector inv_sqrt_deg(m);
  for (Eigen::Index i = 0; i < m; ++i)
    inv_sqrt_deg(i) =
        degree(i) > eps_degree ? 1.0 / std::sqrt(degree(i)) : 0.0;

  LossTerm term;
  term.grad = Matrix::Zero(m, fhat.cols());
  const double eps2 = eps_norm * eps_norm;

  // Accumulation order is fixed by the sparse storage layout, keeping the
  // result bit-identical across runs.
  for (int o = 0; o < w.outerSize(); ++o)
    for (SparseMatrix::InnerIterator it(w, o); it; ++it) {
      const Eigen::Index i = it.row(), j = it.col();
      if (degree(i) <= eps_degree || degree(j) <= eps_degree) continue;
      const Vector u = fhat.row(i).transpose() * inv_sqrt_deg(i) -
                       fhat.row(j).transpose() * inv_sqrt_deg(j);
      const double norm = std::sqrt(u.squaredNorm() + eps2);
      term.value += it.value() * norm;
      const Vector g = (it.value() / norm) * u;
      term.grad.row(i) += g.transpose() * inv_sqrt_deg(i);
      term.grad.row(j) -= g.transpose() * inv_sqrt_deg(j);
    }
  return term;
}

LossTerm regularization_loss(const Matrix& fhat, const Matrix& forig,
                             double eps_norm) {
  if (fhat.rows() != forig.rows() || fhat.cols() != forig.cols())
    throw ShapeMismatch("updated and original feature shapes differ");

  LossTerm term;
  term.grad = Matrix::Zero(fhat.rows(), fhat.cols());
  const double eps2 = eps_norm * eps_norm;
  for (Eigen::Index i = 0; i < fhat.rows(); ++i) {
    const Vector diff = (fhat.row(i) - forig.row(i)).transpose();
    const double norm = std::sqrt(diff.squaredNorm() + eps2);
    term.value += norm;
    term.grad.row(i) = diff.transpose() / norm;
  }
  return term;
}

double total_loss(double l_con, double l_pred, double lambda) {
  if (!std::isfinite(l_con) || !std::isfinite(l_pred))
    throw BadParams("loss inputs must be finite");
  return lambda * l_con + l_pred;
}

LossReport consensus_loss(const Matrix& fhat, const Matrix& forig,
                          const SparseMatrix& w_symmetric,
                          const LossConfig& cfg, double l_pred) {
  cfg.validate();
  const LossTerm smt =
      smoothness_loss(fhat, w_symmetric, cfg.eps_norm, cfg.eps_degree);
  const LossTerm reg = regularization_loss(fhat, forig, cfg.eps_norm);

  LossReport report;
  report.l_smt = smt.value;
  report.l_reg = reg.value;
  report.l_con = smt.value + cfg.mu * reg.value;
  report.l_pred = l_pred;
  report.l_total = total_loss(report.l_con, l_pred, cfg.lambda);
  report.grad_fhat = smt.grad + cfg.mu * reg.grad;
  return report;
}

double cross_entropy_loss(const Matrix& logits,
                          const std::vector<int>& targets) {
  const Eigen::Index tokens = logits.rows();
  if (static_cast<Eigen::Index>(targets.size()) != tokens)
    throw ShapeMismatch("one target per logit row required");
  if (tokens == 0) throw BadParams("no tokens");

  double sum = 0.0;
  for (Eigen::Index t = 0; t < tokens; ++t) {
    const int y = targets[static_cast<std::size_t>(t)];
    if (y < 0 || y >= logits.cols())
      throw BadParams("target class out of range");
    const double peak = logits.row(t).maxCoeff();
    const double lse =
        peak + std::log((logits.row(t).array() - peak).exp().sum());
    sum += lse - logits(t, y);
  }
  return sum / static_cast<double>(tokens);
}

void write_loss_report(const LossReport& report, const std::string& path,
                       const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (!provenance.empty()) out << "# " << provenance << '\n';
  char buf[64];
  const auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << '=' << buf << '\n';
  };
  put("l_smt", report.l_smt);
  put("l_reg", report.l_reg);
  put("l_con", report.l_con);
  put("l_pred", report.l_pred);
  put("l_total", report.l_total);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

FiniteDiffReport finite_diff_check(
    const LossFn& fn, const Matrix& point, double h, double tol,
    const std::function<bool(Eigen::Index, Eigen::Index)>& skip) {
  if (h <= 0.0) throw BadParams("step h must be positive");

  const Matrix analytic = fn(point).second;
  if (analytic.rows() != point.rows() || analytic.cols() != point.cols())
    throw ShapeMismatch("gradient shape does not match the point");

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  FiniteDiffReport report;
  Matrix probe = point;
  for (Eigen::Index i = 0; i < point.rows(); ++i)
    for (Eigen::Index j = 0; j < point.cols(); ++j) {
      if (skip && skip(i, j)) {
        ++report.skipped;
        continue;
      }
      const double saved = probe(i, j);
      probe(i, j) = saved + h;
      const double plus = fn(probe).first;
      probe(i, j) = saved - h;
      const double minus = fn(probe).first;
      probe(i, j) = saved;

      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic(i, j);
      // The difference plus - minus carries an unavoidable rounding error of
      // about eps * |f|, so the numeric derivative has an absolute floor of
      // eps * |f| / (2h). Folding that floor, rescaled by 1/tol, into the
      // denominator makes the test "|a - n| <= tol (|a| + |n|) + floor": a
      // mixed criterion that stays sharp for wrong gradients without failing
      // honest near-zero entries on cancellation noise.
      const double floor =
          kEps * (std::abs(plus) + std::abs(minus)) / (2.0 * h * tol);
      const double rel = std::abs(a - numeric) /
                         (std::abs(a) + std::abs(numeric) + floor + 1e-300);
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_row = i;
        report.worst_col = j;
      }
      ++report.checked;
    }
  report.pass = report.max_rel_err <= tol;
  return report;
}

}  // namespace percloud
