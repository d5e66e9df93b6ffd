#include "icbt/model.h"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "icbt/errors.h"
#include "icbt/math.h"

namespace icbt {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

void require_open_unit(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie strictly inside (0, 1)");
  }
}

// Log-likelihood contribution of one pair with w_ik wins for i and w_ki for k.
inline double pair_loglik(double eta, int w_ik, int w_ki) {
  double ll = 0.0;
  if (w_ik) ll += w_ik * log_sigmoid(eta);
  if (w_ki) ll += w_ki * log_sigmoid(-eta);
  return ll;
}

void check_objects(std::size_t state_n, const ComparisonDataset& data) {
  if (data.num_objects() > state_n) {
    throw DataError("object '" + data.objects().label(state_n) +
                    "' appears in the data but not in the model state");
  }
}

}  // namespace

ProbabilityMatrix::ProbabilityMatrix(std::size_t n)
    : n_(n), p_(n * n, std::numeric_limits<double>::quiet_NaN()) {}

// ---------------------------------------------------------------------------

ModelState::ModelState(std::shared_ptr<const PairConstraints> constraints)
    : constraints_(std::move(constraints)) {
  skills_.position.assign(constraints_->num_objects(), 0);
  intrans_.label.assign(num_pairs(constraints_->num_objects()), 0);
}

ModelState::ModelState(std::shared_ptr<const PairConstraints> constraints, SkillClustering skills,
                       IntransitivityClustering intrans)
    : constraints_(std::move(constraints)), skills_(std::move(skills)), intrans_(std::move(intrans)) {
  validate();
}

int ModelState::pair_label(std::size_t i, std::size_t k) const {
  if (i == k) throw std::invalid_argument("a pair needs two distinct objects");
  const int s = intrans_.label[pair_id(i, k)];
  return i > k ? s : -s;
}

void ModelState::validate() const {
  auto fail = [](const std::string& msg) { throw InvariantViolation(msg); };
  if (!constraints_) fail("state has no pair constraints");
  const std::size_t n = constraints_->num_objects();

  const auto& phi = skills_.levels;
  if (phi.empty()) fail("skill levels are empty");
  if (skills_.zero_position >= phi.size()) fail("zero skill position out of range");
  if (phi[skills_.zero_position] != 0.0) fail("phi_0 is not 0");
  for (std::size_t a = 0; a < phi.size(); ++a) {
    if (!std::isfinite(phi[a])) fail("non-finite skill level");
    if (a > 0 && !(phi[a - 1] < phi[a])) {
      std::ostringstream os;
      os << "skill levels not strictly increasing at position " << a;
      fail(os.str());
    }
  }
  if (skills_.position.size() != n) fail("skill allocation size differs from object count");
  for (std::size_t i = 0; i < n; ++i) {
    if (skills_.position[i] >= phi.size()) fail("object allocated to a missing skill level");
  }
  if (skills_.position[constraints_->reference()] != skills_.zero_position) {
    fail("reference object is not at skill level 0");
  }

  const auto& theta = intrans_.levels;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!std::isfinite(theta[k]) || !(theta[k] > 0.0)) fail("intransitivity level not positive");
    if (k > 0 && !(theta[k - 1] < theta[k])) fail("intransitivity levels not strictly increasing");
  }
  if (intrans_.label.size() != num_pairs(n)) fail("pair allocation size differs from pair count");
  const int K = intrans_.K();
  for (std::size_t pid = 0; pid < intrans_.label.size(); ++pid) {
    const int s = intrans_.label[pid];
    if (s < -K || s > K) fail("pair label outside -K..K");
    if (constraints_->is_fixed(pid) && s != 0) fail("fixed pair carries a non-zero label");
  }
}

// ---------------------------------------------------------------------------

double bt_probability(double r_i, double r_k) {
  require_finite(r_i, "skill");
  require_finite(r_k, "skill");
  return sigmoid(r_i - r_k);
}

double probability_from_bt_and_theta(double p_bt, double theta) {
  require_open_unit(p_bt, "Bradley-Terry probability");
  require_finite(theta, "theta");
  // p e^t / (p e^t + 1 - p) is sigmoid(logit(p) + t); the logit form avoids overflow.
  return sigmoid(logit(p_bt) + theta);
}

double icbt_probability(double theta_ik, double r_i, double r_k) {
  require_finite(theta_ik, "theta");
  require_finite(r_i, "skill");
  require_finite(r_k, "skill");
  return sigmoid(theta_ik + r_i - r_k);
}

double transitive_bridge(double p_ij, double p_jk) {
  require_open_unit(p_ij, "p_ij");
  require_open_unit(p_jk, "p_jk");
  const double prod = p_ij * p_jk;
  return prod / (1.0 + 2.0 * prod - (p_ij + p_jk));
}

double skill_of(const ModelState& state, std::size_t i) {
  if (i >= state.num_objects()) throw std::out_of_range("object index out of range");
  return state.skill(i);
}

double theta_of(const ModelState& state, std::size_t i, std::size_t k) {
  if (i >= state.num_objects() || k >= state.num_objects()) {
    throw std::out_of_range("object index out of range");
  }
  return state.theta(i, k);
}

double log_likelihood(const ModelState& state, const ComparisonDataset& data) {
  const std::size_t n = data.num_objects();
  check_objects(state.num_objects(), data);
  double ll = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const int w_ik = data.wins(i, k);
      const int w_ki = data.wins(k, i);
      if (w_ik + w_ki == 0) continue;
      ll += pair_loglik(state.logit_probability(i, k), w_ik, w_ki);
    }
  }
  return ll;
}

double bt_log_likelihood(std::span<const double> skills, const ComparisonDataset& data) {
  const std::size_t n = data.num_objects();
  check_objects(skills.size(), data);
  double ll = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const int w_ik = data.wins(i, k);
      const int w_ki = data.wins(k, i);
      if (w_ik + w_ki == 0) continue;
      ll += pair_loglik(skills[i] - skills[k], w_ik, w_ki);
    }
  }
  return ll;
}

ProbabilityMatrix pairwise_probability_matrix(const ModelState& state) {
  const std::size_t n = state.num_objects();
  ProbabilityMatrix p(n);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const double eta = state.logit_probability(i, k);
      p(i, k) = sigmoid(eta);
      p(k, i) = sigmoid(-eta);
    }
  }
  return p;
}

}  // namespace icbt
