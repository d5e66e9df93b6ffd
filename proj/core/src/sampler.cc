#include "icbt/sampler.h"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "icbt/errors.h"
#include "icbt/io.h"
#include "icbt/math.h"
#include "icbt/split_transform.h"

namespace icbt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogHalf = std::log(0.5);
const double kLogQuarter = std::log(0.25);

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

bool coin(Rng& rng) { return uniform01(rng) < 0.5; }

double log_normal_pdf(double x, double sd) {
  const double z = x / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

int sign(int s) { return s > 0 ? 1 : (s < 0 ? -1 : 0); }

// Index drawn from unnormalised log weights.
std::size_t sample_log_weights(const std::vector<double>& logw, Rng& rng) {
  const double m = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) {
    w[i] = std::exp(logw[i] - m);
    total += w[i];
  }
  double r = uniform01(rng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    r -= w[i];
    if (r < 0.0) return i;
  }
  return w.size() - 1;
}

// ---- label bookkeeping -------------------------------------------------------

// Opens a new level with label `label` (>= 1): existing labels with
// |s| >= label move one step away from zero.
void open_theta_label(IntransitivityClustering& z, int label) {
  for (int& s : z.label) {
    if (std::abs(s) >= label) s += sign(s);
  }
}

// Closes label `label` (>= 1), which must be empty: labels beyond it move one
// step towards zero.
void close_theta_label(IntransitivityClustering& z, int label) {
  for (int& s : z.label) {
    if (std::abs(s) > label) s -= sign(s);
  }
}

// ---- truncated prior draws for the add-empty-cluster moves ------------------

struct TruncatedDraw {
  double x = 0.0;
  double log_density = -kInf;
};

// Gamma(shape alpha, rate beta) restricted to (lo, hi); hi may be +inf.
double log_gamma_mass(double alpha, double beta, double lo, double hi) {
  using boost::math::gamma_p;
  using boost::math::gamma_q;
  const double p_lo = gamma_p(alpha, beta * lo);
  if (p_lo > 0.5) {
    const double q_hi = std::isinf(hi) ? 0.0 : gamma_q(alpha, beta * hi);
    return std::log(gamma_q(alpha, beta * lo) - q_hi);
  }
  const double p_hi = std::isinf(hi) ? 1.0 : gamma_p(alpha, beta * hi);
  return std::log(p_hi - p_lo);
}

double log_gamma_pdf(double x, double alpha, double beta) {
  return alpha * std::log(beta) - std::lgamma(alpha) + (alpha - 1.0) * std::log(x) - beta * x;
}

TruncatedDraw draw_truncated_gamma(double alpha, double beta, double lo, double hi, Rng& rng) {
  using boost::math::gamma_p;
  using boost::math::gamma_p_inv;
  using boost::math::gamma_q;
  using boost::math::gamma_q_inv;
  TruncatedDraw d;
  const double v = uniform01(rng);
  try {
    const double p_lo = gamma_p(alpha, beta * lo);
    if (p_lo > 0.5) {
      const double q_lo = gamma_q(alpha, beta * lo);
      const double q_hi = std::isinf(hi) ? 0.0 : gamma_q(alpha, beta * hi);
      const double q = q_hi + v * (q_lo - q_hi);
      if (!(q > 0.0)) return d;
      d.x = gamma_q_inv(alpha, q) / beta;
    } else {
      const double p_hi = std::isinf(hi) ? 1.0 : gamma_p(alpha, beta * hi);
      const double p = p_lo + v * (p_hi - p_lo);
      if (!(p > 0.0) || !(p < 1.0)) return d;
      d.x = gamma_p_inv(alpha, p) / beta;
    }
  } catch (const std::exception&) {
    return d;
  }
  if (!(d.x > lo) || !(d.x < hi)) return d;
  d.log_density = log_gamma_pdf(d.x, alpha, beta) - log_gamma_mass(alpha, beta, lo, hi);
  return d;
}

// Normal(0, sd^2) restricted to (lo, hi); either end may be infinite.
double log_normal_mass(double sd, double lo, double hi) {
  boost::math::normal_distribution<double> nd(0.0, sd);
  if (lo >= 0.0) {
    const double q_lo = boost::math::cdf(boost::math::complement(nd, lo));
    const double q_hi = std::isinf(hi) ? 0.0 : boost::math::cdf(boost::math::complement(nd, hi));
    return std::log(q_lo - q_hi);
  }
  const double c_lo = std::isinf(lo) ? 0.0 : boost::math::cdf(nd, lo);
  const double c_hi = std::isinf(hi) ? 1.0 : boost::math::cdf(nd, hi);
  return std::log(c_hi - c_lo);
}

TruncatedDraw draw_truncated_normal(double sd, double lo, double hi, Rng& rng) {
  boost::math::normal_distribution<double> nd(0.0, sd);
  TruncatedDraw d;
  const double v = uniform01(rng);
  try {
    if (lo >= 0.0) {
      const double q_lo = boost::math::cdf(boost::math::complement(nd, lo));
      const double q_hi = std::isinf(hi) ? 0.0 : boost::math::cdf(boost::math::complement(nd, hi));
      const double q = q_hi + v * (q_lo - q_hi);
      if (!(q > 0.0) || !(q < 1.0)) return d;
      d.x = boost::math::quantile(boost::math::complement(nd, q));
    } else {
      const double c_lo = std::isinf(lo) ? 0.0 : boost::math::cdf(nd, lo);
      const double c_hi = std::isinf(hi) ? 1.0 : boost::math::cdf(nd, hi);
      const double c = c_lo + v * (c_hi - c_lo);
      if (!(c > 0.0) || !(c < 1.0)) return d;
      d.x = boost::math::quantile(nd, c);
    }
  } catch (const std::exception&) {
    return d;
  }
  if (!(d.x > lo) || !(d.x < hi) || d.x == 0.0) return d;
  d.log_density = log_normal_pdf(d.x, sd) - log_normal_mass(sd, lo, hi);
  return d;
}

// ---- bounded random walk in matching space ----------------------------------

struct WalkStep {
  double x = 0.0;
  double log_q_ratio = 0.0;  // log q(x | x') - log q(x' | x)
  bool valid = false;
};

// Bounds may depend on the current value (a reflected outer bound); the
// reverse proposal is evaluated under the bounds implied by x'.
template <class LoFn, class HiFn>
WalkStep bounded_walk(double x, LoFn lo_of, HiFn hi_of, double step, Rng& rng) {
  WalkStep out;
  const double lo = lo_of(x);
  const double hi = hi_of(x);
  const double y = split::matching_transform(x, lo, hi);
  const double eps = std::normal_distribution<double>(0.0, step)(rng);
  const double y_new = y + eps;
  const double x_new = split::matching_inverse(y_new, lo, hi);
  if (!(x_new > lo) || !(x_new < hi)) return out;
  const double log_fwd = log_normal_pdf(eps, step) - split::log_matching_inverse_derivative(y_new, lo, hi);

  const double lo_r = lo_of(x_new);
  const double hi_r = hi_of(x_new);
  if (!(x > lo_r) || !(x < hi_r)) return out;
  const double y_from = split::matching_transform(x_new, lo_r, hi_r);
  const double y_to = split::matching_transform(x, lo_r, hi_r);
  const double log_rev =
      log_normal_pdf(y_to - y_from, step) - split::log_matching_inverse_derivative(y_to, lo_r, hi_r);
  out.x = x_new;
  out.log_q_ratio = log_rev - log_fwd;
  out.valid = std::isfinite(out.log_q_ratio);
  return out;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i - 1] < v[i])) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view move_kind_name(MoveKind kind) {
  switch (kind) {
    case MoveKind::kThetaLevel: return "theta_level";
    case MoveKind::kPhiLevel: return "phi_level";
    case MoveKind::kSplitTheta: return "split_theta";
    case MoveKind::kMergeTheta: return "merge_theta";
    case MoveKind::kSplitPhi: return "split_phi";
    case MoveKind::kMergePhi: return "merge_phi";
    case MoveKind::kAddTheta: return "add_theta";
    case MoveKind::kDeleteTheta: return "delete_theta";
    case MoveKind::kAddPhi: return "add_phi";
    case MoveKind::kDeletePhi: return "delete_phi";
  }
  return "unknown";
}

void SamplerSchedule::validate() const {
  const auto p = moves.as_array();
  double total = 0.0;
  for (double x : p) {
    if (x < 0.0) throw std::invalid_argument("move probabilities must be non-negative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("move probabilities must sum to 1");
  if (!(rw_step_theta > 0.0) || !(rw_step_phi > 0.0) || !(sigma_split > 0.0)) {
    throw std::invalid_argument("proposal scales must be positive");
  }
  if (iterations < 0 || burn_in < 0 || thin < 1) {
    throw std::invalid_argument("iterations and burn-in must be >= 0 and thin >= 1");
  }
}

// ---- proposal builders --------------------------------------------------------

Proposal propose_theta_split(const ModelState& state, int level, double u, double sigma, Rng& rng) {
  Proposal out{state, 0.0, false};
  const int K = state.K();
  if (level < 0 || level > K || !(u > 0.0)) return out;
  auto& z = out.state.mutable_intrans();
  const auto& c = state.constraints();
  const auto& theta = state.intrans().levels;

  double log_q_alloc = 0.0;
  double log_jac = 0.0;
  if (level == 0) {
    std::optional<double> nb;
    if (K >= 1) nb = theta[0];
    const auto nl = split::split_zero(u, nb, +1);
    if (!(nl.level > 0.0) || (nb && !(nl.level < *nb))) return out;
    log_jac = nl.log_jacobian;
    z.levels.insert(z.levels.begin(), nl.level);
    open_theta_label(z, 1);
    for (auto pid : c.free_pairs()) {
      if (z.label[pid] != 0) continue;
      if (coin(rng)) {
        log_q_alloc += kLogHalf;
      } else {
        z.label[pid] = coin(rng) ? 1 : -1;
        log_q_alloc += kLogQuarter;
      }
    }
  } else {
    const std::size_t idx = static_cast<std::size_t>(level - 1);
    const double lo = level == 1 ? 0.0 : theta[idx - 1];
    split::SplitLevels s = level < K ? split::split_interior(theta[idx], u, lo, theta[idx + 1])
                                     : split::split_reflected_upper(theta[idx], u, lo);
    if (!(s.low > lo) || !(s.high > s.low) || (level < K && !(s.high < theta[idx + 1]))) return out;
    log_jac = s.log_jacobian;
    open_theta_label(z, level + 1);
    z.levels[idx] = s.low;
    z.levels.insert(z.levels.begin() + static_cast<std::ptrdiff_t>(idx) + 1, s.high);
    for (auto pid : c.free_pairs()) {
      int& lab = z.label[pid];
      if (lab == level || lab == -level) {
        log_q_alloc += kLogHalf;
        if (coin(rng)) lab += sign(lab);
      }
    }
  }
  // Level choice 1/(K+1) forward, adjacent-pair choice 1/(K+1) in reverse.
  out.log_proposal_ratio = -log_q_alloc - split::log_scaled_chi2_1(u, sigma) + log_jac;
  out.valid = std::isfinite(out.log_proposal_ratio) && strictly_increasing(z.levels);
  return out;
}

Proposal propose_theta_merge(const ModelState& state, int lower_level, double sigma) {
  Proposal out{state, 0.0, false};
  const int K = state.K();
  if (K < 1 || lower_level < 0 || lower_level >= K) return out;
  auto& z = out.state.mutable_intrans();
  const auto& c = state.constraints();
  const auto& theta = state.intrans().levels;

  double log_q_alloc = 0.0;
  double u = 0.0;
  double log_jac = 0.0;
  const int j = lower_level;
  if (j == 0) {
    std::optional<double> nb;
    if (K >= 2) nb = theta[1];
    const auto m = split::merge_zero(theta[0], nb);
    u = m.u;
    log_jac = m.log_jacobian;
    for (auto pid : c.free_pairs()) {
      int& lab = z.label[pid];
      if (lab == 0) {
        log_q_alloc += kLogHalf;
      } else if (lab == 1 || lab == -1) {
        log_q_alloc += kLogQuarter;
        lab = 0;
      }
    }
    close_theta_label(z, 1);
    z.levels.erase(z.levels.begin());
  } else {
    const std::size_t idx = static_cast<std::size_t>(j - 1);
    const double lo = j == 1 ? 0.0 : theta[idx - 1];
    split::MergedLevel m = (j + 1 < K)
                               ? split::merge_interior(theta[idx], theta[idx + 1], lo, theta[idx + 2])
                               : split::merge_reflected_upper(theta[idx], theta[idx + 1], lo);
    u = m.u;
    log_jac = m.log_jacobian;
    for (auto pid : c.free_pairs()) {
      int& lab = z.label[pid];
      if (std::abs(lab) == j || std::abs(lab) == j + 1) {
        log_q_alloc += kLogHalf;
        lab = sign(lab) * j;
      }
    }
    close_theta_label(z, j + 1);
    z.levels[idx] = m.level;
    z.levels.erase(z.levels.begin() + static_cast<std::ptrdiff_t>(idx) + 1);
  }
  out.log_proposal_ratio = log_q_alloc + split::log_scaled_chi2_1(u, sigma) - log_jac;
  out.valid = std::isfinite(out.log_proposal_ratio) && strictly_increasing(z.levels) &&
              (z.levels.empty() || z.levels.front() > 0.0);
  return out;
}

Proposal propose_phi_split(const ModelState& state, std::size_t position, int direction, double u,
                           double sigma, Rng& rng) {
  Proposal out{state, 0.0, false};
  const auto& S = state.skills();
  const std::size_t A = static_cast<std::size_t>(S.A());
  const std::size_t z = S.zero_position;
  if (position > A || !(u > 0.0)) return out;
  auto& T = out.state.mutable_skills();
  const auto& L = S.levels;
  const auto& c = state.constraints();

  double log_choice_fwd = -std::log(static_cast<double>(A + 1));
  const double log_choice_rev = -std::log(static_cast<double>(A + 1));
  double log_q_alloc = 0.0;
  double log_jac = 0.0;

  // Inserts a level at `at`, shifting positions >= at.
  auto insert_level = [&](std::size_t at, double value) {
    T.levels.insert(T.levels.begin() + static_cast<std::ptrdiff_t>(at), value);
    for (auto& p : T.position) {
      if (p >= at) ++p;
    }
    if (T.zero_position >= at) ++T.zero_position;
  };

  if (position == z) {
    log_choice_fwd += kLogHalf;
    const int dir = direction >= 0 ? 1 : -1;
    std::optional<double> nb;
    if (dir > 0 && z + 1 <= A) nb = L[z + 1];
    if (dir < 0 && z >= 1) nb = L[z - 1];
    const auto nl = split::split_zero(u, nb, dir);
    if (dir > 0 && (!(nl.level > 0.0) || (nb && !(nl.level < *nb)))) return out;
    if (dir < 0 && (!(nl.level < 0.0) || (nb && !(nl.level > *nb)))) return out;
    log_jac = nl.log_jacobian;
    const std::size_t at = dir > 0 ? z + 1 : z;
    insert_level(at, nl.level);
    const std::size_t new_pos = at;
    for (auto i : c.free_objects()) {
      if (T.position[i] != T.zero_position) continue;
      log_q_alloc += kLogHalf;
      if (coin(rng)) T.position[i] = new_pos;
    }
  } else {
    split::SplitLevels s;
    if (position > z) {
      const double lo = L[position - 1];
      s = position < A ? split::split_interior(L[position], u, lo, L[position + 1])
                       : split::split_reflected_upper(L[position], u, lo);
      if (!(s.low > lo) || !(s.high > s.low) || (position < A && !(s.high < L[position + 1]))) {
        return out;
      }
    } else {
      const double hi = L[position + 1];
      s = position > 0 ? split::split_interior(L[position], u, L[position - 1], hi)
                       : split::split_reflected_lower(L[position], u, hi);
      if (!(s.high < hi) || !(s.high > s.low) || (position > 0 && !(s.low > L[position - 1]))) {
        return out;
      }
    }
    log_jac = s.log_jacobian;
    insert_level(position + 1, s.high);
    T.levels[position] = s.low;
    for (auto i : c.free_objects()) {
      if (T.position[i] != position) continue;
      log_q_alloc += kLogHalf;
      if (coin(rng)) T.position[i] = position + 1;
    }
  }
  out.log_proposal_ratio = log_choice_rev - log_choice_fwd - log_q_alloc -
                           split::log_scaled_chi2_1(u, sigma) + log_jac;
  out.valid = std::isfinite(out.log_proposal_ratio) && strictly_increasing(T.levels) &&
              T.levels[T.zero_position] == 0.0;
  return out;
}

Proposal propose_phi_merge(const ModelState& state, std::size_t lower_position, double sigma) {
  Proposal out{state, 0.0, false};
  const auto& S = state.skills();
  const std::size_t A = static_cast<std::size_t>(S.A());
  const std::size_t z = S.zero_position;
  const std::size_t p = lower_position;
  if (A < 1 || p >= A) return out;
  auto& T = out.state.mutable_skills();
  const auto& L = S.levels;
  const auto& c = state.constraints();

  const double log_choice_fwd = -std::log(static_cast<double>(A));
  double log_choice_rev = -std::log(static_cast<double>(A));
  double log_q_alloc = 0.0;
  double u = 0.0;
  double log_jac = 0.0;
  double merged = 0.0;

  if (p == z || p + 1 == z) {
    log_choice_rev += kLogHalf;
    const std::size_t moving = p == z ? z + 1 : z - 1;
    std::optional<double> nb;
    if (p == z && z + 2 <= A) nb = L[z + 2];
    if (p + 1 == z && z >= 2) nb = L[z - 2];
    const auto m = split::merge_zero(L[moving], nb);
    u = m.u;
    log_jac = m.log_jacobian;
    merged = 0.0;
  } else if (p > z) {
    const double lo = L[p - 1];
    const auto m = p + 1 < A ? split::merge_interior(L[p], L[p + 1], lo, L[p + 2])
                             : split::merge_reflected_upper(L[p], L[p + 1], lo);
    u = m.u;
    log_jac = m.log_jacobian;
    merged = m.level;
  } else {
    const double hi = L[p + 2];
    const auto m = p > 0 ? split::merge_interior(L[p], L[p + 1], L[p - 1], hi)
                         : split::merge_reflected_lower(L[p], L[p + 1], hi);
    u = m.u;
    log_jac = m.log_jacobian;
    merged = m.level;
  }

  // Collapse positions p and p+1 into p.
  for (auto i : c.free_objects()) {
    if (T.position[i] == p || T.position[i] == p + 1) log_q_alloc += kLogHalf;
  }
  for (auto& pos : T.position) {
    if (pos > p) --pos;
  }
  if (T.zero_position > p) --T.zero_position;
  T.levels.erase(T.levels.begin() + static_cast<std::ptrdiff_t>(p) + 1);
  T.levels[p] = merged;

  out.log_proposal_ratio = log_choice_rev - log_choice_fwd + log_q_alloc +
                           split::log_scaled_chi2_1(u, sigma) - log_jac;
  out.valid = std::isfinite(out.log_proposal_ratio) && strictly_increasing(T.levels) &&
              T.levels[T.zero_position] == 0.0;
  return out;
}

// ---- Sampler --------------------------------------------------------------------

Sampler::Sampler(const ComparisonDataset& data, const Hyperparameters& h,
                 const SamplerSchedule& schedule, ModelState init, std::uint64_t seed)
    : data_(data),
      h_(h),
      schedule_(schedule),
      state_(std::move(init)),
      rng_(seed),
      step_theta_(schedule.rw_step_theta),
      step_phi_(schedule.rw_step_phi) {
  h_.validate();
  schedule_.validate();
  state_.validate();
  const std::size_t n = state_.num_objects();
  if (data_.num_objects() > n) {
    throw DataError("object '" + data_.objects().label(n) + "' is not covered by the initial state");
  }
  wins_hi_.assign(num_pairs(n), 0);
  wins_lo_.assign(num_pairs(n), 0);
  object_pairs_.resize(n);
  for (std::size_t i = 1; i < data_.num_objects(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      const int w_ik = data_.wins(i, k);
      const int w_ki = data_.wins(k, i);
      if (w_ik + w_ki == 0) continue;
      const std::size_t pid = pair_id(i, k);
      wins_hi_[pid] = w_ik;
      wins_lo_[pid] = w_ki;
      object_pairs_[i].push_back(compared_.size());
      object_pairs_[k].push_back(compared_.size());
      compared_.push_back({i, k, pid, w_ik, w_ki});
    }
  }
  lp_ = compute_log_posterior(state_);
}

int Sampler::max_K() const {
  return schedule_.max_K < 0 ? std::numeric_limits<int>::max() : schedule_.max_K;
}

int Sampler::max_A() const {
  const int cap = static_cast<int>(state_.num_objects()) - 1;
  return schedule_.max_A < 0 ? cap : std::min(cap, schedule_.max_A);
}

double Sampler::log_likelihood_fast(const ModelState& s) const {
  double ll = 0.0;
  for (const auto& pc : compared_) {
    const double eta = s.intrans().level_of_label(s.intrans().label[pc.pid]) + s.skill(pc.i) - s.skill(pc.k);
    if (pc.w_ik) ll += pc.w_ik * log_sigmoid(eta);
    if (pc.w_ki) ll += pc.w_ki * log_sigmoid(-eta);
  }
  return ll;
}

double Sampler::compute_log_posterior(const ModelState& s) const {
  return log_likelihood_fast(s) + log_prior_joint(s, h_);
}

bool Sampler::accept(double log_ratio) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(uniform01(rng_)) < log_ratio;
}

void Sampler::record(MoveKind kind, bool accepted) {
  auto& s = stats_[static_cast<std::size_t>(kind)];
  ++s.attempted;
  if (accepted) ++s.accepted;
}

void Sampler::check(std::string_view move) const {
  if (!schedule_.validate_each_move) return;
  try {
    state_.validate();
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(std::string(e.what()) + " after move '" + std::string(move) +
                             "'; state: " + state_to_json_string(state_));
  }
}

bool Sampler::try_proposal(Proposal&& p, MoveKind kind) {
  bool accepted = false;
  if (p.valid) {
    const double lp_new = compute_log_posterior(p.state);
    if (accept(lp_new - lp_ + p.log_proposal_ratio)) {
      state_ = std::move(p.state);
      lp_ = lp_new;
      accepted = true;
    }
  }
  record(kind, accepted);
  if (accepted) check(move_kind_name(kind));
  return accepted;
}

bool Sampler::update_theta_level(int k, double step) {
  const int K = state_.K();
  if (k < 1 || k > K) throw std::out_of_range("theta level index out of range");
  auto& theta = state_.mutable_intrans().levels;
  const std::size_t idx = static_cast<std::size_t>(k - 1);
  const double lo = k == 1 ? 0.0 : theta[idx - 1];
  const bool top = k == K;
  const double next = top ? 0.0 : theta[idx + 1];
  auto lo_of = [lo](double) { return lo; };
  auto hi_of = [lo, top, next](double x) { return top ? 2.0 * x - lo : next; };

  const double old = theta[idx];
  const WalkStep w = bounded_walk(old, lo_of, hi_of, step, rng_);
  bool accepted = false;
  if (w.valid) {
    theta[idx] = w.x;
    const double lp_new = compute_log_posterior(state_);
    if (accept(lp_new - lp_ + w.log_q_ratio)) {
      lp_ = lp_new;
      accepted = true;
    } else {
      theta[idx] = old;
    }
  }
  record(MoveKind::kThetaLevel, accepted);
  if (accepted) check("theta_level");
  return accepted;
}

bool Sampler::update_phi_level(int label, double step) {
  auto& S = state_.mutable_skills();
  if (label == 0) throw std::invalid_argument("phi_0 is fixed at 0");
  if (label < -S.A_minus() || label > S.A_plus()) throw std::out_of_range("skill label out of range");
  const std::size_t p = static_cast<std::size_t>(label + S.A_minus());
  const std::size_t A = static_cast<std::size_t>(S.A());
  auto& L = S.levels;
  const bool reflect_lo = p == 0;
  const bool reflect_hi = p == A;
  const double below = reflect_lo ? 0.0 : L[p - 1];
  const double above = reflect_hi ? 0.0 : L[p + 1];
  auto lo_of = [=](double x) { return reflect_lo ? 2.0 * x - above : below; };
  auto hi_of = [=](double x) { return reflect_hi ? 2.0 * x - below : above; };

  const double old = L[p];
  const WalkStep w = bounded_walk(old, lo_of, hi_of, step, rng_);
  bool accepted = false;
  if (w.valid && w.x != 0.0) {
    L[p] = w.x;
    const double lp_new = compute_log_posterior(state_);
    if (accept(lp_new - lp_ + w.log_q_ratio)) {
      lp_ = lp_new;
      accepted = true;
    } else {
      L[p] = old;
    }
  }
  record(MoveKind::kPhiLevel, accepted);
  if (accepted) check("phi_level");
  return accepted;
}

void Sampler::reallocate_pair(std::size_t pid) {
  const auto& c = state_.constraints();
  if (pid >= num_pairs(state_.num_objects())) throw std::out_of_range("pair id out of range");
  if (c.is_fixed(pid)) throw std::invalid_argument("fixed pairs cannot be reallocated");
  auto& Z = state_.mutable_intrans();
  const int K = Z.K();
  if (K == 0) return;

  std::vector<int> counts(static_cast<std::size_t>(2 * K + 1), 0);
  for (auto q : c.free_pairs()) ++counts[static_cast<std::size_t>(Z.label[q] + K)];
  --counts[static_cast<std::size_t>(Z.label[pid] + K)];

  auto [i, k] = c.pair_objects(pid);
  const double dr = state_.skill(i) - state_.skill(k);
  const int w_ik = wins_hi_[pid];
  const int w_ki = wins_lo_[pid];
  std::vector<double> logw(counts.size());
  for (int s = -K; s <= K; ++s) {
    const double eta = Z.level_of_label(s) + dr;
    double ll = 0.0;
    if (w_ik) ll += w_ik * log_sigmoid(eta);
    if (w_ki) ll += w_ki * log_sigmoid(-eta);
    logw[static_cast<std::size_t>(s + K)] = ll + std::log(h_.gamma_K + counts[static_cast<std::size_t>(s + K)]);
  }
  Z.label[pid] = static_cast<int>(sample_log_weights(logw, rng_)) - K;
}

void Sampler::reallocate_object(std::size_t object) {
  const auto& c = state_.constraints();
  if (object >= state_.num_objects()) throw std::out_of_range("object index out of range");
  if (object == c.reference()) throw std::invalid_argument("the reference object is never reallocated");
  auto& S = state_.mutable_skills();
  const std::size_t levels = S.num_levels();
  if (levels == 1) return;

  std::vector<int> counts(levels, 0);
  for (auto i : c.free_objects()) ++counts[S.position[i]];
  --counts[S.position[object]];

  std::vector<double> logw(levels);
  for (std::size_t a = 0; a < levels; ++a) {
    const double r = S.levels[a];
    double ll = 0.0;
    for (auto ci : object_pairs_[object]) {
      const auto& pc = compared_[ci];
      const double th = state_.intrans().level_of_label(state_.intrans().label[pc.pid]);
      const double eta = pc.i == object ? th + r - state_.skill(pc.k) : th + state_.skill(pc.i) - r;
      if (pc.w_ik) ll += pc.w_ik * log_sigmoid(eta);
      if (pc.w_ki) ll += pc.w_ki * log_sigmoid(-eta);
    }
    logw[a] = ll + std::log(h_.gamma_A + counts[a]);
  }
  S.position[object] = sample_log_weights(logw, rng_);
}

void Sampler::update_all_levels() {
  for (int k = 1; k <= state_.K(); ++k) update_theta_level(k, step_theta_);
  const auto& S = state_.skills();
  for (int a = -S.A_minus(); a <= S.A_plus(); ++a) {
    if (a != 0) update_phi_level(a, step_phi_);
  }
}

void Sampler::reallocate_all() {
  const auto& c = state_.constraints();
  if (state_.K() > 0) {
    for (auto pid : c.free_pairs()) reallocate_pair(pid);
  }
  if (state_.A() > 0) {
    for (auto i : c.free_objects()) reallocate_object(i);
  }
  lp_ = compute_log_posterior(state_);
  check("reallocate");
}

bool Sampler::split_intransitivity() {
  const int K = state_.K();
  if (K >= max_K()) {
    record(MoveKind::kSplitTheta, false);
    return false;
  }
  const int level = std::uniform_int_distribution<int>(0, K)(rng_);
  const double z = std::normal_distribution<double>(0.0, 1.0)(rng_);
  const double u = schedule_.sigma_split * z * z;
  return try_proposal(propose_theta_split(state_, level, u, schedule_.sigma_split, rng_),
                      MoveKind::kSplitTheta);
}

bool Sampler::merge_intransitivity() {
  const int K = state_.K();
  if (K == 0) return false;
  const int j = std::uniform_int_distribution<int>(0, K - 1)(rng_);
  return try_proposal(propose_theta_merge(state_, j, schedule_.sigma_split), MoveKind::kMergeTheta);
}

bool Sampler::split_skill() {
  const int A = state_.A();
  if (A + 1 > max_A()) {
    record(MoveKind::kSplitPhi, false);
    return false;
  }
  const auto position = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, A)(rng_));
  const int direction = coin(rng_) ? 1 : -1;
  const double z = std::normal_distribution<double>(0.0, 1.0)(rng_);
  const double u = schedule_.sigma_split * z * z;
  return try_proposal(propose_phi_split(state_, position, direction, u, schedule_.sigma_split, rng_),
                      MoveKind::kSplitPhi);
}

bool Sampler::merge_skill() {
  const int A = state_.A();
  if (A == 0) return false;
  const auto p = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, A - 1)(rng_));
  return try_proposal(propose_phi_merge(state_, p, schedule_.sigma_split), MoveKind::kMergePhi);
}

namespace {

std::vector<int> empty_theta_levels(const ModelState& s) {
  const int K = s.K();
  std::vector<char> used(static_cast<std::size_t>(K + 1), 0);
  for (auto pid : s.constraints().free_pairs()) used[static_cast<std::size_t>(std::abs(s.intrans().label[pid]))] = 1;
  std::vector<int> out;
  for (int k = 1; k <= K; ++k) {
    if (!used[static_cast<std::size_t>(k)]) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> empty_phi_positions(const ModelState& s) {
  const auto& S = s.skills();
  std::vector<char> used(S.num_levels(), 0);
  for (auto i : s.constraints().free_objects()) used[S.position[i]] = 1;
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < S.num_levels(); ++p) {
    if (p != S.zero_position && !used[p]) out.push_back(p);
  }
  return out;
}

}  // namespace

bool Sampler::add_empty_intransitivity() {
  const int K = state_.K();
  if (K >= max_K()) {
    record(MoveKind::kAddTheta, false);
    return false;
  }
  const auto& theta = state_.intrans().levels;
  const int interval = std::uniform_int_distribution<int>(0, K)(rng_);
  const double lo = interval == 0 ? 0.0 : theta[static_cast<std::size_t>(interval - 1)];
  const double hi = interval == K ? kInf : theta[static_cast<std::size_t>(interval)];
  const auto draw = draw_truncated_gamma(h_.alpha, h_.beta, lo, hi, rng_);
  Proposal p{state_, 0.0, false};
  if (std::isfinite(draw.log_density)) {
    auto& z = p.state.mutable_intrans();
    open_theta_label(z, interval + 1);
    z.levels.insert(z.levels.begin() + interval, draw.x);
    const auto empties = empty_theta_levels(p.state);
    p.log_proposal_ratio = -std::log(static_cast<double>(empties.size())) +
                           std::log(static_cast<double>(K + 1)) - draw.log_density;
    p.valid = strictly_increasing(z.levels);
  }
  return try_proposal(std::move(p), MoveKind::kAddTheta);
}

bool Sampler::delete_empty_intransitivity() {
  const auto empties = empty_theta_levels(state_);
  if (empties.empty()) {
    record(MoveKind::kDeleteTheta, false);
    return false;
  }
  const int k = empties[std::uniform_int_distribution<std::size_t>(0, empties.size() - 1)(rng_)];
  const int K = state_.K();
  const auto& theta = state_.intrans().levels;
  const std::size_t idx = static_cast<std::size_t>(k - 1);
  const double lo = k == 1 ? 0.0 : theta[idx - 1];
  const double hi = k == K ? kInf : theta[idx + 1];
  const double log_q = log_gamma_pdf(theta[idx], h_.alpha, h_.beta) - log_gamma_mass(h_.alpha, h_.beta, lo, hi);

  Proposal p{state_, 0.0, false};
  auto& z = p.state.mutable_intrans();
  z.levels.erase(z.levels.begin() + static_cast<std::ptrdiff_t>(idx));
  close_theta_label(z, k);
  // Reverse add: interval choice 1/K in the smaller state, then the density.
  p.log_proposal_ratio = -std::log(static_cast<double>(K)) + log_q +
                         std::log(static_cast<double>(empties.size()));
  p.valid = std::isfinite(p.log_proposal_ratio);
  return try_proposal(std::move(p), MoveKind::kDeleteTheta);
}

bool Sampler::add_empty_skill() {
  const int A = state_.A();
  if (A + 1 > max_A()) {
    record(MoveKind::kAddPhi, false);
    return false;
  }
  const auto& L = state_.skills().levels;
  // A+2 gaps around the A+1 sorted levels.
  const auto gap = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, A + 1)(rng_));
  const double lo = gap == 0 ? -kInf : L[gap - 1];
  const double hi = gap == L.size() ? kInf : L[gap];
  const auto draw = draw_truncated_normal(h_.nu_A, lo, hi, rng_);
  Proposal p{state_, 0.0, false};
  if (std::isfinite(draw.log_density)) {
    auto& T = p.state.mutable_skills();
    T.levels.insert(T.levels.begin() + static_cast<std::ptrdiff_t>(gap), draw.x);
    for (auto& pos : T.position) {
      if (pos >= gap) ++pos;
    }
    if (T.zero_position >= gap) ++T.zero_position;
    const auto empties = empty_phi_positions(p.state);
    p.log_proposal_ratio = -std::log(static_cast<double>(empties.size())) +
                           std::log(static_cast<double>(A + 2)) - draw.log_density;
    p.valid = strictly_increasing(T.levels);
  }
  return try_proposal(std::move(p), MoveKind::kAddPhi);
}

bool Sampler::delete_empty_skill() {
  const auto empties = empty_phi_positions(state_);
  if (empties.empty()) {
    record(MoveKind::kDeletePhi, false);
    return false;
  }
  const std::size_t pos = empties[std::uniform_int_distribution<std::size_t>(0, empties.size() - 1)(rng_)];
  const auto& L = state_.skills().levels;
  const int A = state_.A();
  const double lo = pos == 0 ? -kInf : L[pos - 1];
  const double hi = pos + 1 == L.size() ? kInf : L[pos + 1];
  const double log_q = log_normal_pdf(L[pos], h_.nu_A) - log_normal_mass(h_.nu_A, lo, hi);

  Proposal p{state_, 0.0, false};
  auto& T = p.state.mutable_skills();
  T.levels.erase(T.levels.begin() + static_cast<std::ptrdiff_t>(pos));
  for (auto& q : T.position) {
    if (q > pos) --q;
  }
  if (T.zero_position > pos) --T.zero_position;
  // Reverse add: gap choice 1/(A+1) in the smaller state (A levels, A+1 gaps).
  p.log_proposal_ratio = -std::log(static_cast<double>(A + 1)) + log_q +
                         std::log(static_cast<double>(empties.size()));
  p.valid = std::isfinite(p.log_proposal_ratio);
  return try_proposal(std::move(p), MoveKind::kDeletePhi);
}

void Sampler::step(bool adapting) {
  const auto probs = schedule_.moves.as_array();
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  switch (static_cast<MoveType>(pick(rng_))) {
    case MoveType::kUpdateLevels: {
      if (!adapting) {
        update_all_levels();
        break;
      }
      const double gain = 1.0 / std::pow(static_cast<double>(++adapt_count_), 0.6);
      for (int k = 1; k <= state_.K(); ++k) {
        const bool acc = update_theta_level(k, step_theta_);
        step_theta_ *= std::exp(gain * ((acc ? 1.0 : 0.0) - schedule_.target_acceptance));
      }
      const auto& S = state_.skills();
      for (int a = -S.A_minus(); a <= state_.skills().A_plus(); ++a) {
        if (a == 0) continue;
        const bool acc = update_phi_level(a, step_phi_);
        step_phi_ *= std::exp(gain * ((acc ? 1.0 : 0.0) - schedule_.target_acceptance));
      }
      step_theta_ = std::clamp(step_theta_, 1e-3, 20.0);
      step_phi_ = std::clamp(step_phi_, 1e-3, 20.0);
      break;
    }
    case MoveType::kReallocate:
      reallocate_all();
      break;
    case MoveType::kSplitMergeTheta:
      if (coin(rng_)) split_intransitivity(); else merge_intransitivity();
      break;
    case MoveType::kSplitMergePhi:
      if (coin(rng_)) split_skill(); else merge_skill();
      break;
    case MoveType::kAddDeleteTheta:
      if (coin(rng_)) add_empty_intransitivity(); else delete_empty_intransitivity();
      break;
    case MoveType::kAddDeletePhi:
      if (coin(rng_)) add_empty_skill(); else delete_empty_skill();
      break;
  }
}

ChainSamples run_chain(const ModelState& init, const ComparisonDataset& data,
                       const Hyperparameters& h, const SamplerSchedule& schedule,
                       std::uint64_t seed) {
  Sampler sampler(data, h, schedule, init, seed);
  ChainSamples out;
  out.seed = seed;
  const long total = schedule.burn_in + schedule.iterations;
  out.log_posterior.reserve(static_cast<std::size_t>(total));
  out.states.reserve(static_cast<std::size_t>(schedule.iterations / schedule.thin));
  for (long it = 0; it < total; ++it) {
    const bool burning = it < schedule.burn_in;
    sampler.step(burning && schedule.adapt_burnin);
    out.log_posterior.push_back(sampler.log_posterior());
    if (!burning && (it - schedule.burn_in + 1) % schedule.thin == 0) {
      out.states.push_back(sampler.state());
    }
  }
  out.stats = sampler.stats();
  out.final_state = sampler.state();
  out.final_step_theta = sampler.step_theta();
  out.final_step_phi = sampler.step_phi();
  return out;
}

}  // namespace icbt
