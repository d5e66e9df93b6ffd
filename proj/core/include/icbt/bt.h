#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "icbt/dataset.h"
#include "icbt/model.h"

namespace icbt {

struct BtFit {
  std::vector<double> r_bt;  // r_bt[reference] == 0
  std::size_t reference = 0;
  double loglik = 0.0;       // unpenalized log-likelihood at r_bt
  bool converged = false;
  int iterations = 0;
};

struct BtOptions {
  double ridge = 1e-6;
  double tol = 1e-9;
  int max_iter = 200;
  // Defaults to the object with the most distinct opponents.
  std::optional<std::size_t> reference;
};

// Maximum-likelihood Bradley-Terry skills by damped Newton with step halving
// on the (optionally ridge-penalised) concave log-likelihood.
BtFit fit_bt_mle(const ComparisonDataset& data, const BtOptions& options = {});

ProbabilityMatrix bt_pairwise_probabilities(const BtFit& fit);

}  // namespace icbt
