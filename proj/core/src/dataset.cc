#include "icbt/dataset.h"

#include <algorithm>
#include <queue>
#include <stdexcept>

#include "icbt/errors.h"

namespace icbt {

ObjectIndex::ObjectIndex(std::vector<std::string> labels) {
  for (auto& l : labels) {
    if (lookup_.count(l)) {
      throw DataError("duplicate object label '" + l + "'");
    }
    intern(l);
  }
}

ObjectIndex ObjectIndex::numbered(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  return ObjectIndex(std::move(labels));
}

std::optional<std::size_t> ObjectIndex::find(std::string_view label) const {
  auto it = lookup_.find(std::string(label));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t ObjectIndex::at(std::string_view label) const {
  if (auto idx = find(label)) return *idx;
  throw DataError("unknown object '" + std::string(label) + "'");
}

std::size_t ObjectIndex::intern(std::string_view label) {
  if (auto idx = find(label)) return *idx;
  labels_.emplace_back(label);
  lookup_.emplace(labels_.back(), labels_.size() - 1);
  return labels_.size() - 1;
}

ComparisonDataset::ComparisonDataset(ObjectIndex objects, std::vector<Comparison> comparisons,
                                     std::vector<std::string> seasons)
    : objects_(std::move(objects)),
      comparisons_(std::move(comparisons)),
      seasons_(std::move(seasons)) {
  const std::size_t n = objects_.size();
  if (!seasons_.empty() && seasons_.size() != comparisons_.size()) {
    throw std::invalid_argument("season tags must match the comparison count");
  }
  wins_.assign(n * n, 0);
  for (const auto& c : comparisons_) {
    if (c.first >= n || c.second >= n) {
      throw DataError("comparison references an object outside the index");
    }
    if (c.first == c.second) {
      throw DataError("object '" + objects_.label(c.first) + "' compared with itself");
    }
    ++wins_[c.winner() * n + c.loser()];
  }
}

std::vector<std::size_t> ComparisonDataset::distinct_opponents() const {
  const std::size_t n = num_objects();
  std::vector<std::size_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i != k && total(i, k) > 0) ++out[i];
    }
  }
  return out;
}

bool ComparisonDataset::connected() const {
  const std::size_t n = num_objects();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> todo;
  todo.push(0);
  seen[0] = 1;
  std::size_t count = 1;
  while (!todo.empty()) {
    const std::size_t i = todo.front();
    todo.pop();
    for (std::size_t k = 0; k < n; ++k) {
      if (!seen[k] && total(i, k) > 0) {
        seen[k] = 1;
        ++count;
        todo.push(k);
      }
    }
  }
  return count == n;
}

ComparisonDataset ComparisonDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Comparison> picked;
  std::vector<std::string> seasons;
  picked.reserve(indices.size());
  for (std::size_t idx : indices) {
    picked.push_back(comparisons_.at(idx));
    if (!seasons_.empty()) seasons.push_back(seasons_[idx]);
  }
  return ComparisonDataset(objects_, std::move(picked), std::move(seasons));
}

ComparisonDataset ComparisonDataset::filter_season(std::string_view season) const {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < seasons_.size(); ++c) {
    if (seasons_[c] == season) keep.push_back(c);
  }
  return subset(keep);
}

// ---------------------------------------------------------------------------

PairConstraints::PairConstraints(std::size_t n, std::size_t reference,
                                 std::vector<std::size_t> fixed_pair_ids)
    : n_(n), reference_(reference) {
  if (n == 0) throw std::invalid_argument("at least one object is required");
  if (reference >= n) throw std::invalid_argument("reference object out of range");
  const std::size_t np = num_pairs(n);
  fixed_.assign(np, 0);
  pair_of_.resize(np);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) pair_of_[pair_id(i, k)] = {i, k};
  }
  for (std::size_t pid : fixed_pair_ids) {
    if (pid >= np) throw std::invalid_argument("fixed pair id out of range");
    fixed_[pid] = 1;
  }

  // Connectivity of the fixed-pair graph (identifiability of intransitivity).
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t pid = 0; pid < np; ++pid) {
    if (!fixed_[pid]) continue;
    auto [i, k] = pair_of_[pid];
    adj[i].push_back(k);
    adj[k].push_back(i);
  }
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> todo;
  todo.push(reference);
  seen[reference] = 1;
  std::size_t reached = 1;
  while (!todo.empty()) {
    auto i = todo.front();
    todo.pop();
    for (auto k : adj[i]) {
      if (!seen[k]) {
        seen[k] = 1;
        ++reached;
        todo.push(k);
      }
    }
  }
  if (reached != n) {
    throw std::invalid_argument("fixed pairs do not form a connected spanning graph");
  }

  for (std::size_t pid = 0; pid < np; ++pid) {
    (fixed_[pid] ? fixed_list_ : free_list_).push_back(pid);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i != reference) free_objects_.push_back(i);
  }
}

std::shared_ptr<const PairConstraints> PairConstraints::star(std::size_t n, std::size_t reference) {
  std::vector<std::size_t> fixed;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != reference) fixed.push_back(pair_id(i, reference));
  }
  return std::make_shared<const PairConstraints>(n, reference, std::move(fixed));
}

std::shared_ptr<const PairConstraints> PairConstraints::for_dataset(const ComparisonDataset& data) {
  const std::size_t n = data.num_objects();
  if (data.empty()) return star(n, 0);
  if (!data.connected()) {
    throw DataError(
        "comparison graph is disconnected; intransitivity and skills are not identifiable "
        "(restrict the data to one connected group of objects)");
  }
  const auto opponents = data.distinct_opponents();
  const std::size_t reference = static_cast<std::size_t>(
      std::max_element(opponents.begin(), opponents.end()) - opponents.begin());
  if (opponents[reference] + 1 == n) return star(n, reference);

  std::vector<std::size_t> fixed;
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> todo;
  todo.push(reference);
  seen[reference] = 1;
  while (!todo.empty()) {
    auto i = todo.front();
    todo.pop();
    for (std::size_t k = 0; k < n; ++k) {
      if (!seen[k] && data.total(i, k) > 0) {
        seen[k] = 1;
        fixed.push_back(pair_id(i, k));
        todo.push(k);
      }
    }
  }
  return std::make_shared<const PairConstraints>(n, reference, std::move(fixed));
}

}  // namespace icbt
