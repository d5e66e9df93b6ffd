#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "icbt/dataset.h"

namespace icbt {

// Dense n x n table of pairwise probabilities; the diagonal is unused (NaN).
class ProbabilityMatrix {
 public:
  ProbabilityMatrix() = default;
  explicit ProbabilityMatrix(std::size_t n);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t k) const { return p_[i * n_ + k]; }
  double& operator()(std::size_t i, std::size_t k) { return p_[i * n_ + k]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> p_;
};

// Skill levels phi (sorted, with phi_0 = 0 at position A_minus) and the
// allocation of each object to a level. Labels run -A_minus..A_plus; the
// storage uses positions 0..A in the sorted level array.
struct SkillClustering {
  std::vector<double> levels{0.0};
  std::size_t zero_position = 0;
  std::vector<std::size_t> position;  // per object

  std::size_t num_levels() const { return levels.size(); }
  int A() const { return static_cast<int>(levels.size()) - 1; }
  int A_minus() const { return static_cast<int>(zero_position); }
  int A_plus() const { return A() - A_minus(); }
  int label_of(std::size_t object) const {
    return static_cast<int>(position[object]) - static_cast<int>(zero_position);
  }
  double level_of_label(int label) const {
    return levels.at(static_cast<std::size_t>(label + A_minus()));
  }
};

// Positive ordered intransitivity levels theta_1 < ... < theta_K and a signed
// label in -K..K for every pair i > k (packed by pair_id). The mirror k > i
// is derived on read, so antisymmetry holds structurally.
struct IntransitivityClustering {
  std::vector<double> levels;  // theta_1..theta_K
  std::vector<int> label;      // per pair id

  int K() const { return static_cast<int>(levels.size()); }
  double level_of_label(int s) const {
    if (s == 0) return 0.0;
    return s > 0 ? levels[static_cast<std::size_t>(s - 1)] : -levels[static_cast<std::size_t>(-s - 1)];
  }
};

class ModelState {
 public:
  ModelState() = default;
  // All-zero state: A = 0, K = 0, every object at skill 0, every pair transitive.
  explicit ModelState(std::shared_ptr<const PairConstraints> constraints);
  ModelState(std::shared_ptr<const PairConstraints> constraints, SkillClustering skills,
             IntransitivityClustering intrans);

  std::size_t num_objects() const { return constraints_->num_objects(); }
  const PairConstraints& constraints() const { return *constraints_; }
  const std::shared_ptr<const PairConstraints>& constraints_ptr() const { return constraints_; }

  const SkillClustering& skills() const { return skills_; }
  const IntransitivityClustering& intrans() const { return intrans_; }
  SkillClustering& mutable_skills() { return skills_; }
  IntransitivityClustering& mutable_intrans() { return intrans_; }

  int K() const { return intrans_.K(); }
  int A() const { return skills_.A(); }

  double skill(std::size_t i) const { return skills_.levels[skills_.position[i]]; }
  // Signed cluster label of the ordered pair (i, k); label(k, i) = -label(i, k).
  int pair_label(std::size_t i, std::size_t k) const;
  double theta(std::size_t i, std::size_t k) const {
    return intrans_.level_of_label(pair_label(i, k));
  }
  double logit_probability(std::size_t i, std::size_t k) const {
    return theta(i, k) + skill(i) - skill(k);
  }

  // Throws InvariantViolation describing the first broken invariant.
  void validate() const;

 private:
  std::shared_ptr<const PairConstraints> constraints_;
  SkillClustering skills_;
  IntransitivityClustering intrans_;
};

// ---- pointwise model --------------------------------------------------------

double bt_probability(double r_i, double r_k);
double probability_from_bt_and_theta(double p_bt, double theta);
double icbt_probability(double theta_ik, double r_i, double r_k);
double transitive_bridge(double p_ij, double p_jk);

// ---- state accessors ----------------------------------------------------------

double skill_of(const ModelState& state, std::size_t i);
double theta_of(const ModelState& state, std::size_t i, std::size_t k);

// Bernoulli log-likelihood of every comparison, evaluated in logit space.
double log_likelihood(const ModelState& state, const ComparisonDataset& data);
// Bradley-Terry log-likelihood for an explicit skill vector.
double bt_log_likelihood(std::span<const double> skills, const ComparisonDataset& data);

ProbabilityMatrix pairwise_probability_matrix(const ModelState& state);

}  // namespace icbt
