#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icbt/dataset.h"
#include "icbt/evaluation.h"
#include "icbt/model.h"

namespace icbt {

// Stamped into every output file.
struct Provenance {
  std::string config_digest;
  std::uint64_t seed = 0;
};

// Comparison CSV: header naming `winner` and `loser` columns, optionally
// `date` and `season`. Seasons are kept; dates are accepted and dropped.
// Lines starting with '#' are comments. Throws DataError with the offending
// line number.
ComparisonDataset read_comparisons_csv(std::istream& in);
ComparisonDataset load_comparisons_csv(const std::string& path);
// With provenance, a leading comment line records the digest and seed.
void write_comparisons_csv(std::ostream& out, const ComparisonDataset& data,
                           const Provenance* prov = nullptr);

// 64-bit FNV-1a of the text, as 16 hex digits.
std::string config_digest(std::string_view text);

// Full model state (levels, every label, the fixed pairs) with no derived
// data. Doubles round-trip exactly.
std::string state_to_json_string(const ModelState& state, int indent = -1);
void write_state_json(std::ostream& out, const ModelState& state, const Provenance& prov,
                      const std::vector<std::string>& labels = {});
// Throws DataError on malformed input.
ModelState state_from_json_string(std::string_view text);
ModelState read_state_json(std::istream& in);

// One JSON state per line.
void write_samples_jsonl(std::ostream& out, std::span<const ModelState> states, const Provenance& prov);
std::vector<ModelState> read_samples_jsonl(std::istream& in);

using Diagnostics = std::map<std::string, double>;

void write_summary_json(std::ostream& out, const PosteriorSummary& summary, const Provenance& prov,
                        const Diagnostics& diagnostics = {});
// Throws DataError naming the line of the first problem.
PosteriorSummary read_summary_json(std::istream& in);

}  // namespace icbt
