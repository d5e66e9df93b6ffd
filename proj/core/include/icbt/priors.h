#pragma once

#include <cstddef>
#include <span>

#include "icbt/dataset.h"
#include "icbt/model.h"

namespace icbt {

// Normalizer of the truncated Poisson prior on A. Support is 0..n-1; the
// printed form divides by sum_{i=0}^{n} lambda^i / i!, the support form by
// sum_{i=0}^{n-1}. The choice is a constant and never changes MH ratios.
enum class TruncationNormalizer { kPrinted, kSupport };

// Order-statistic factor in the skill-level prior: A! makes the density of A
// ordered normals (with 0 inserted) integrate to one, (A+1)! is the printed
// variant, which tilts the A-marginal by a factor A+1.
enum class SkillOrderFactor { kNormalized, kPrinted };

struct Hyperparameters {
  double lambda_K = 2.0;
  double lambda_A = 1.0;
  double gamma_K = 1.0;
  double gamma_A = 1.0;
  double nu_A = 2.0;
  double alpha = 2.0;
  double beta = 2.0;

  TruncationNormalizer a_normalizer = TruncationNormalizer::kPrinted;
  SkillOrderFactor phi_factor = SkillOrderFactor::kNormalized;
  // Multinomial coefficient on the DMA allocation priors. With it the DMA is a
  // mass over occupancy counts rather than over labelled allocations.
  bool dma_count_coefficient = false;

  // Package defaults for n objects (lambda_A = n / 2).
  static Hyperparameters defaults_for(std::size_t n);
  // Throws std::invalid_argument if any hyperparameter is not strictly positive.
  void validate() const;
};

// Dirichlet-multinomial log-mass with symmetric concentration gamma over
// counts.size() clusters.
double log_dirichlet_multinomial(std::span<const int> counts, double gamma, bool count_coefficient);

// Signed labels in -K..K of the free pairs.
double log_dma_intransitivity(std::span<const int> labels, double gamma_K, int K,
                              bool count_coefficient = false);
// Signed labels in -A_minus..A_plus of the non-reference objects.
double log_dma_skill(std::span<const int> labels, double gamma_A, int A_minus, int A_plus,
                     bool count_coefficient = false);

double log_prior_K(int k, double lambda_K);
double log_prior_A(int a, double lambda_A, std::size_t n,
                   TruncationNormalizer normalizer = TruncationNormalizer::kPrinted);
double log_prior_theta(std::span<const double> theta, double alpha, double beta);
// phi holds all A+1 levels in increasing order, including the zero element.
double log_prior_phi(std::span<const double> phi, double nu_A,
                     SkillOrderFactor factor = SkillOrderFactor::kNormalized);

double log_prior_joint(const ModelState& state, const Hyperparameters& h);
double log_posterior_unnorm(const ModelState& state, const ComparisonDataset& data,
                            const Hyperparameters& h);

}  // namespace icbt
