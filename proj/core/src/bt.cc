#include "icbt/bt.h"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "icbt/errors.h"
#include "icbt/math.h"

namespace icbt {

namespace {

double penalised(const std::vector<double>& r, const ComparisonDataset& data, double ridge) {
  double pen = 0.0;
  for (double x : r) pen += x * x;
  return bt_log_likelihood(r, data) - 0.5 * ridge * pen;
}

}  // namespace

BtFit fit_bt_mle(const ComparisonDataset& data, const BtOptions& options) {
  const std::size_t n = data.num_objects();
  if (options.ridge < 0.0) throw std::invalid_argument("ridge must be >= 0");
  if (options.ridge == 0.0 && !data.connected()) {
    throw DataError(
        "comparison graph is disconnected so the Bradley-Terry MLE need not exist; "
        "use ridge > 0");
  }

  BtFit fit;
  if (options.reference) {
    if (*options.reference >= n) throw std::invalid_argument("reference object out of range");
    fit.reference = *options.reference;
  } else if (n > 0) {
    const auto opp = data.distinct_opponents();
    fit.reference = static_cast<std::size_t>(std::max_element(opp.begin(), opp.end()) - opp.begin());
  }
  fit.r_bt.assign(n, 0.0);
  if (n < 2) {
    fit.loglik = 0.0;
    fit.converged = true;
    return fit;
  }

  // Free coordinates: every object except the reference.
  std::vector<std::size_t> free;
  std::vector<int> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == fit.reference) continue;
    slot[i] = static_cast<int>(free.size());
    free.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(free.size());

  std::vector<double>& r = fit.r_bt;
  double objective = penalised(r, data, options.ridge);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t k = 0; k < i; ++k) {
        const int nik = data.total(i, k);
        if (nik == 0) continue;
        const double p = sigmoid(r[i] - r[k]);
        const double g = data.wins(i, k) - nik * p;  // d ll / d r_i
        const double w = nik * p * (1.0 - p);
        if (slot[i] >= 0) {
          grad(slot[i]) += g;
          hess(slot[i], slot[i]) += w;
        }
        if (slot[k] >= 0) {
          grad(slot[k]) -= g;
          hess(slot[k], slot[k]) += w;
        }
        if (slot[i] >= 0 && slot[k] >= 0) {
          hess(slot[i], slot[k]) -= w;
          hess(slot[k], slot[i]) -= w;
        }
      }
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      grad(a) -= options.ridge * r[free[static_cast<std::size_t>(a)]];
      hess(a, a) += options.ridge;
    }
    fit.iterations = iter;
    if (grad.lpNorm<Eigen::Infinity>() < options.tol) {
      fit.converged = true;
      break;
    }
    // Negative Hessian of the concave objective is positive semi-definite.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) step = grad;

    double t = 1.0;
    bool improved = false;
    std::vector<double> trial(r);
    for (int halving = 0; halving < 60; ++halving) {
      for (Eigen::Index a = 0; a < m; ++a) trial[free[static_cast<std::size_t>(a)]] = r[free[static_cast<std::size_t>(a)]] + t * step(a);
      const double obj = penalised(trial, data, options.ridge);
      if (obj >= objective) {
        r = trial;
        objective = obj;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) {
      // No ascent possible at floating-point resolution.
      fit.converged = grad.lpNorm<Eigen::Infinity>() < std::sqrt(options.tol);
      break;
    }
    fit.iterations = iter + 1;
  }
  fit.loglik = bt_log_likelihood(r, data);
  return fit;
}

ProbabilityMatrix bt_pairwise_probabilities(const BtFit& fit) {
  const std::size_t n = fit.r_bt.size();
  ProbabilityMatrix p(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i != k) p(i, k) = sigmoid(fit.r_bt[i] - fit.r_bt[k]);
    }
  }
  return p;
}

}  // namespace icbt
