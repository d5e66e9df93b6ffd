#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "icbt/dataset.h"
#include "icbt/model.h"
#include "icbt/priors.h"

namespace icbt {

using Rng = std::mt19937_64;

enum class MoveType {
  kUpdateLevels,
  kReallocate,
  kSplitMergeTheta,
  kSplitMergePhi,
  kAddDeleteTheta,
  kAddDeletePhi,
};
inline constexpr std::size_t kNumMoveTypes = 6;

struct MoveProbabilities {
  double update_levels = 0.35;
  double reallocate = 0.35;
  double split_merge_theta = 0.10;
  double split_merge_phi = 0.10;
  double add_delete_theta = 0.05;
  double add_delete_phi = 0.05;

  std::array<double, kNumMoveTypes> as_array() const {
    return {update_levels, reallocate, split_merge_theta, split_merge_phi, add_delete_theta,
            add_delete_phi};
  }
  // Only fixed-dimension level updates (first warmup stage).
  static MoveProbabilities levels_only() { return {1.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }
  // Level updates and Gibbs reallocation (second warmup stage).
  static MoveProbabilities fixed_dimension() { return {0.5, 0.5, 0.0, 0.0, 0.0, 0.0}; }
};

struct SamplerSchedule {
  MoveProbabilities moves;
  double rw_step_theta = 0.5;
  double rw_step_phi = 0.5;
  double sigma_split = 1.0;   // u ~ sigma * chi^2_1
  long iterations = 100000;   // kept iterations after burn-in
  long burn_in = 20000;
  long thin = 10;
  bool adapt_burnin = true;   // Robbins-Monro step tuning, burn-in only
  double target_acceptance = 0.3;
  // Upper limits on K and A; moves past them are rejected. -1: K unbounded,
  // A up to n - 1.
  int max_K = -1;
  int max_A = -1;
  bool validate_each_move = false;

  // Throws std::invalid_argument on a malformed schedule.
  void validate() const;
};

// Per-move acceptance bookkeeping.
enum class MoveKind {
  kThetaLevel,
  kPhiLevel,
  kSplitTheta,
  kMergeTheta,
  kSplitPhi,
  kMergePhi,
  kAddTheta,
  kDeleteTheta,
  kAddPhi,
  kDeletePhi,
};
inline constexpr std::size_t kNumMoveKinds = 10;
std::string_view move_kind_name(MoveKind kind);

struct MoveStats {
  long attempted = 0;
  long accepted = 0;
  double rate() const { return attempted ? static_cast<double>(accepted) / attempted : 0.0; }
};

struct ChainSamples {
  std::vector<ModelState> states;       // post burn-in, thinned
  std::vector<double> log_posterior;    // one entry per iteration, burn-in included
  std::array<MoveStats, kNumMoveKinds> stats{};
  std::uint64_t seed = 0;
  ModelState final_state;
  double final_step_theta = 0.0;
  double final_step_phi = 0.0;
};

// A reversible-jump proposal: the candidate state plus every term of the log
// acceptance ratio except the target ratio (move-choice probabilities,
// allocation and auxiliary densities, log |Jacobian|).
struct Proposal {
  ModelState state;
  double log_proposal_ratio = 0.0;
  bool valid = false;
};

// Builders behind the trans-dimensional moves. `u` is the auxiliary variable;
// allocation coin flips come from `rng`.
Proposal propose_theta_split(const ModelState& state, int level, double u, double sigma, Rng& rng);
Proposal propose_theta_merge(const ModelState& state, int lower_level, double sigma);
// `position` indexes the sorted skill levels; `direction` (+1/-1) only
// matters when splitting the zero level.
Proposal propose_phi_split(const ModelState& state, std::size_t position, int direction, double u,
                           double sigma, Rng& rng);
Proposal propose_phi_merge(const ModelState& state, std::size_t lower_position, double sigma);

// Owns a working copy of the state and applies the individual moves.
class Sampler {
 public:
  Sampler(const ComparisonDataset& data, const Hyperparameters& h, const SamplerSchedule& schedule,
          ModelState init, std::uint64_t seed);

  const ModelState& state() const { return state_; }
  double log_posterior() const { return lp_; }
  Rng& rng() { return rng_; }
  const SamplerSchedule& schedule() const { return schedule_; }
  const std::array<MoveStats, kNumMoveKinds>& stats() const { return stats_; }
  double step_theta() const { return step_theta_; }
  double step_phi() const { return step_phi_; }

  // Random-walk update of theta_k (1 <= k <= K) in matching space.
  bool update_theta_level(int k, double step);
  // Random-walk update of the skill level with label a != 0.
  bool update_phi_level(int label, double step);
  // Gibbs draw of a free pair's label from its full conditional.
  void reallocate_pair(std::size_t pid);
  // Gibbs draw of a non-reference object's skill label.
  void reallocate_object(std::size_t object);

  bool split_intransitivity();
  bool merge_intransitivity();
  bool split_skill();
  bool merge_skill();
  bool add_empty_intransitivity();
  bool delete_empty_intransitivity();
  bool add_empty_skill();
  bool delete_empty_skill();

  // Sweeps over every level / every free pair and object.
  void update_all_levels();
  void reallocate_all();

  // One iteration: draws a move type from the schedule and applies it.
  void step(bool adapting = false);

 private:
  double compute_log_posterior(const ModelState& s) const;
  double log_likelihood_fast(const ModelState& s) const;
  bool accept(double log_ratio);
  bool try_proposal(Proposal&& p, MoveKind kind);
  void record(MoveKind kind, bool accepted);
  void check(std::string_view move) const;
  int max_K() const;
  int max_A() const;

  struct PairCounts {
    std::size_t i = 0;  // i > k
    std::size_t k = 0;
    std::size_t pid = 0;
    int w_ik = 0;
    int w_ki = 0;
  };

  const ComparisonDataset& data_;
  Hyperparameters h_;
  SamplerSchedule schedule_;
  ModelState state_;
  Rng rng_;
  double lp_ = 0.0;
  double step_theta_;
  double step_phi_;
  long adapt_count_ = 0;
  std::vector<PairCounts> compared_;
  std::vector<int> wins_hi_;  // per pair id: wins of the larger index
  std::vector<int> wins_lo_;
  std::vector<std::vector<std::size_t>> object_pairs_;  // compared_ indices per object
  std::array<MoveStats, kNumMoveKinds> stats_{};
};

ChainSamples run_chain(const ModelState& init, const ComparisonDataset& data,
                       const Hyperparameters& h, const SamplerSchedule& schedule,
                       std::uint64_t seed);

}  // namespace icbt
