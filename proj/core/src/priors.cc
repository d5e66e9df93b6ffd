#include "icbt/priors.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "icbt/math.h"

namespace icbt {

Hyperparameters Hyperparameters::defaults_for(std::size_t n) {
  Hyperparameters h;
  h.lambda_A = std::max(0.5, static_cast<double>(n) / 2.0);
  return h;
}

void Hyperparameters::validate() const {
  for (double v : {lambda_K, lambda_A, gamma_K, gamma_A, nu_A, alpha, beta}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("hyperparameters must be finite and strictly positive");
    }
  }
}

double log_dirichlet_multinomial(std::span<const int> counts, double gamma, bool count_coefficient) {
  const double c = static_cast<double>(counts.size());
  double total = 0.0;
  double sum_lgamma = 0.0;
  double sum_lfact = 0.0;
  for (int b : counts) {
    total += b;
    sum_lgamma += std::lgamma(gamma + b);
    sum_lfact += log_factorial(b);
  }
  double lp = std::lgamma(c * gamma) - c * std::lgamma(gamma) + sum_lgamma -
              std::lgamma(c * gamma + total);
  if (count_coefficient) lp += log_factorial(total) - sum_lfact;
  return lp;
}

double log_dma_intransitivity(std::span<const int> labels, double gamma_K, int K,
                              bool count_coefficient) {
  if (K < 0) throw std::invalid_argument("K must be non-negative");
  std::vector<int> counts(static_cast<std::size_t>(2 * K + 1), 0);
  for (int s : labels) {
    if (s < -K || s > K) throw std::invalid_argument("intransitivity label outside -K..K");
    ++counts[static_cast<std::size_t>(s + K)];
  }
  return log_dirichlet_multinomial(counts, gamma_K, count_coefficient);
}

double log_dma_skill(std::span<const int> labels, double gamma_A, int A_minus, int A_plus,
                     bool count_coefficient) {
  if (A_minus < 0 || A_plus < 0) throw std::invalid_argument("skill level counts must be >= 0");
  std::vector<int> counts(static_cast<std::size_t>(A_minus + A_plus + 1), 0);
  for (int a : labels) {
    if (a < -A_minus || a > A_plus) throw std::invalid_argument("skill label outside -A_-..A_+");
    ++counts[static_cast<std::size_t>(a + A_minus)];
  }
  return log_dirichlet_multinomial(counts, gamma_A, count_coefficient);
}

double log_prior_K(int k, double lambda_K) {
  if (k < 0) throw std::invalid_argument("K must be non-negative");
  return k * std::log(lambda_K) - lambda_K - log_factorial(k);
}

double log_prior_A(int a, double lambda_A, std::size_t n, TruncationNormalizer normalizer) {
  if (a < 0 || static_cast<std::size_t>(a) + 1 > n) {
    throw std::invalid_argument("A outside its support 0..n-1");
  }
  const std::size_t top = normalizer == TruncationNormalizer::kPrinted ? n : n - 1;
  double log_norm = -INFINITY;
  for (std::size_t i = 0; i <= top; ++i) {
    log_norm = log_sum_exp(log_norm, i * std::log(lambda_A) - log_factorial(static_cast<double>(i)));
  }
  return a * std::log(lambda_A) - log_factorial(a) - log_norm;
}

double log_prior_theta(std::span<const double> theta, double alpha, double beta) {
  const std::size_t K = theta.size();
  if (K == 0) return 0.0;
  double lp = log_factorial(static_cast<double>(K));
  const double log_const = alpha * std::log(beta) - std::lgamma(alpha);
  for (std::size_t k = 0; k < K; ++k) {
    if (!(theta[k] > 0.0) || (k > 0 && !(theta[k - 1] < theta[k]))) {
      throw std::invalid_argument("theta must be positive and strictly increasing");
    }
    lp += log_const + (alpha - 1.0) * std::log(theta[k]) - beta * theta[k];
  }
  return lp;
}

double log_prior_phi(std::span<const double> phi, double nu_A, SkillOrderFactor factor) {
  if (phi.empty()) throw std::invalid_argument("phi must contain the zero level");
  const std::size_t A = phi.size() - 1;
  bool has_zero = false;
  double lp = log_factorial(static_cast<double>(factor == SkillOrderFactor::kPrinted ? A + 1 : A));
  const double log_norm = -std::log(nu_A) - 0.5 * std::log(2.0 * std::numbers::pi);
  for (std::size_t a = 0; a < phi.size(); ++a) {
    if (a > 0 && !(phi[a - 1] < phi[a])) {
      throw std::invalid_argument("phi must be strictly increasing");
    }
    if (phi[a] == 0.0) {
      has_zero = true;
      continue;
    }
    const double z = phi[a] / nu_A;
    lp += log_norm - 0.5 * z * z;
  }
  if (!has_zero) throw std::invalid_argument("phi is missing the zero level");
  return lp;
}

double log_prior_joint(const ModelState& state, const Hyperparameters& h) {
  const auto& c = state.constraints();
  const auto& skills = state.skills();
  const auto& intrans = state.intrans();

  std::vector<int> pair_labels;
  pair_labels.reserve(c.free_pairs().size());
  for (auto pid : c.free_pairs()) pair_labels.push_back(intrans.label[pid]);
  std::vector<int> object_labels;
  object_labels.reserve(c.free_objects().size());
  for (auto i : c.free_objects()) object_labels.push_back(skills.label_of(i));

  return log_prior_A(skills.A(), h.lambda_A, state.num_objects(), h.a_normalizer) +
         log_prior_phi(skills.levels, h.nu_A, h.phi_factor) +
         log_dma_skill(object_labels, h.gamma_A, skills.A_minus(), skills.A_plus(),
                       h.dma_count_coefficient) +
         log_prior_K(intrans.K(), h.lambda_K) +
         log_prior_theta(intrans.levels, h.alpha, h.beta) +
         log_dma_intransitivity(pair_labels, h.gamma_K, intrans.K(), h.dma_count_coefficient);
}

double log_posterior_unnorm(const ModelState& state, const ComparisonDataset& data,
                            const Hyperparameters& h) {
  return log_likelihood(state, data) + log_prior_joint(state, h);
}

}  // namespace icbt
