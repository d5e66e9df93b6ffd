#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace icbt {

// Bijection between external object labels and dense indices 0..n-1.
class ObjectIndex {
 public:
  ObjectIndex() = default;
  explicit ObjectIndex(std::vector<std::string> labels);

  // Labels "1".."n".
  static ObjectIndex numbered(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t idx) const { return labels_.at(idx); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<std::size_t> find(std::string_view label) const;
  // Throws DataError naming the label when it is unknown.
  std::size_t at(std::string_view label) const;

  // Appends the label if it is new and returns its index.
  std::size_t intern(std::string_view label);

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// One paired comparison: x = true iff `first` was preferred to `second`.
struct Comparison {
  std::size_t first = 0;
  std::size_t second = 0;
  bool first_won = true;

  std::size_t winner() const { return first_won ? first : second; }
  std::size_t loser() const { return first_won ? second : first; }
};

// Index of the unordered pair {i, k}, i != k, in the packed lower triangle.
inline std::size_t pair_id(std::size_t i, std::size_t k) {
  if (i < k) std::swap(i, k);
  return i * (i - 1) / 2 + k;
}

inline std::size_t num_pairs(std::size_t n) { return n * (n - 1) / 2; }

// Immutable set of binary outcomes plus the aggregated win matrix.
class ComparisonDataset {
 public:
  ComparisonDataset() = default;
  ComparisonDataset(ObjectIndex objects, std::vector<Comparison> comparisons,
                    std::vector<std::string> seasons = {});

  std::size_t num_objects() const { return objects_.size(); }
  std::size_t size() const { return comparisons_.size(); }
  bool empty() const { return comparisons_.empty(); }

  const ObjectIndex& objects() const { return objects_; }
  std::span<const Comparison> comparisons() const { return comparisons_; }
  // Optional per-comparison season tag, empty when absent.
  const std::vector<std::string>& seasons() const { return seasons_; }

  // w_ik: number of comparisons in which i was preferred to k.
  int wins(std::size_t i, std::size_t k) const { return wins_[i * num_objects() + k]; }
  // n_ik = w_ik + w_ki.
  int total(std::size_t i, std::size_t k) const { return wins(i, k) + wins(k, i); }

  std::vector<std::size_t> distinct_opponents() const;
  // True when every object is reachable from every other through comparisons.
  bool connected() const;

  // New dataset over the same objects holding the selected comparisons.
  ComparisonDataset subset(std::span<const std::size_t> indices) const;
  ComparisonDataset filter_season(std::string_view season) const;

 private:
  ObjectIndex objects_;
  std::vector<Comparison> comparisons_;
  std::vector<std::string> seasons_;
  std::vector<int> wins_;
};

// Identifiability structure: the reference object (skill pinned to 0) and the
// connected spanning set of pairs whose intransitivity is pinned to 0.
class PairConstraints {
 public:
  // Star around `reference`: every pair (i, reference) is fixed.
  static std::shared_ptr<const PairConstraints> star(std::size_t n, std::size_t reference = 0);

  // Reference = object with the most distinct opponents (lowest index on
  // ties). Star if it met everyone, otherwise a breadth-first spanning tree of
  // the comparison graph. An empty dataset gets the star around object 0.
  // Throws DataError on a disconnected comparison graph.
  static std::shared_ptr<const PairConstraints> for_dataset(const ComparisonDataset& data);

  // Explicit construction; throws std::invalid_argument unless the fixed pairs
  // form a connected graph spanning all n objects.
  PairConstraints(std::size_t n, std::size_t reference, std::vector<std::size_t> fixed_pair_ids);

  std::size_t num_objects() const { return n_; }
  std::size_t reference() const { return reference_; }
  bool is_fixed(std::size_t pid) const { return fixed_[pid] != 0; }
  std::span<const std::size_t> fixed_pairs() const { return fixed_list_; }
  std::span<const std::size_t> free_pairs() const { return free_list_; }
  std::span<const std::size_t> free_objects() const { return free_objects_; }

  // Objects (i, k), i > k, of a packed pair id.
  std::pair<std::size_t, std::size_t> pair_objects(std::size_t pid) const { return pair_of_[pid]; }

 private:
  std::size_t n_ = 0;
  std::size_t reference_ = 0;
  std::vector<char> fixed_;
  std::vector<std::size_t> fixed_list_;
  std::vector<std::size_t> free_list_;
  std::vector<std::size_t> free_objects_;
  std::vector<std::pair<std::size_t, std::size_t>> pair_of_;
};

}  // namespace icbt
