#include "icbt/io.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "icbt/errors.h"
#include "json.hpp"

namespace icbt {

using nlohmann::json;

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::size_t line_of_byte(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string(what) + ": parse error at line " + std::to_string(line_of_byte(text, e.byte)) +
                    ": " + e.what());
  }
}

json state_json(const ModelState& s) {
  const auto& c = s.constraints();
  json j;
  j["n"] = s.num_objects();
  j["reference"] = c.reference();
  json fixed = json::array();
  for (auto pid : c.fixed_pairs()) {
    auto [i, k] = c.pair_objects(pid);
    fixed.push_back({i, k});
  }
  j["fixed_pairs"] = fixed;
  j["A_minus"] = s.skills().A_minus();
  j["A_plus"] = s.skills().A_plus();
  j["phi"] = s.skills().levels;
  j["K"] = s.K();
  j["theta"] = s.intrans().levels;
  std::vector<int> skill_labels(s.num_objects());
  for (std::size_t i = 0; i < s.num_objects(); ++i) skill_labels[i] = s.skills().label_of(i);
  j["skill_labels"] = skill_labels;
  json pairs = json::array();
  for (auto pid : c.free_pairs()) {
    auto [i, k] = c.pair_objects(pid);
    pairs.push_back({i, k, s.intrans().label[pid]});
  }
  j["pair_labels"] = pairs;
  return j;
}

ModelState state_from(const json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto ref = j.at("reference").get<std::size_t>();
    std::vector<std::size_t> fixed;
    for (const auto& f : j.at("fixed_pairs")) {
      const auto i = f.at(0).get<std::size_t>();
      const auto k = f.at(1).get<std::size_t>();
      if (i >= n || k >= n || i == k) throw DataError("fixed pair out of range");
      fixed.push_back(pair_id(i, k));
    }
    std::shared_ptr<const PairConstraints> constraints;
    try {
      constraints = std::make_shared<const PairConstraints>(n, ref, std::move(fixed));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
    SkillClustering skills;
    skills.levels = j.at("phi").get<std::vector<double>>();
    const int a_minus = j.at("A_minus").get<int>();
    const int a_plus = j.at("A_plus").get<int>();
    if (a_minus < 0 || a_plus < 0 || static_cast<std::size_t>(a_minus + a_plus + 1) != skills.levels.size()) {
      throw DataError("A_minus/A_plus do not match the phi array");
    }
    skills.zero_position = static_cast<std::size_t>(a_minus);
    const auto sl = j.at("skill_labels").get<std::vector<int>>();
    if (sl.size() != n) throw DataError("skill_labels must have n entries");
    skills.position.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (sl[i] < -a_minus || sl[i] > a_plus) throw DataError("skill label out of range");
      skills.position[i] = static_cast<std::size_t>(sl[i] + a_minus);
    }
    IntransitivityClustering z;
    z.levels = j.at("theta").get<std::vector<double>>();
    if (j.at("K").get<int>() != z.K()) throw DataError("K does not match the theta array");
    z.label.assign(num_pairs(n), 0);
    for (const auto& p : j.at("pair_labels")) {
      const auto i = p.at(0).get<std::size_t>();
      const auto k = p.at(1).get<std::size_t>();
      if (i >= n || k >= n || i == k) throw DataError("pair label out of range");
      const int lab = p.at(2).get<int>();
      z.label[pair_id(i, k)] = i > k ? lab : -lab;
    }
    try {
      return ModelState(constraints, std::move(skills), std::move(z));
    } catch (const InvariantViolation& e) {
      throw DataError(std::string("invalid state: ") + e.what());
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed state: ") + e.what());
  }
}

json matrix_json(const ProbabilityMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (std::isnan(m(i, k))) {
        row.push_back(nullptr);
      } else {
        row.push_back(m(i, k));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

ProbabilityMatrix matrix_from(const json& rows, std::size_t n) {
  ProbabilityMatrix m(n);
  if (rows.size() != n) throw DataError("matrix has the wrong number of rows");
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw DataError("matrix row " + std::to_string(i) + " has the wrong length");
    for (std::size_t k = 0; k < n; ++k) {
      if (!rows[i][k].is_null()) m(i, k) = rows[i][k].get<double>();
    }
  }
  return m;
}

json ranking_json(const Ranking& r) { return {{"score", r.score}, {"order", r.order}}; }

Ranking ranking_from(const json& j) {
  return {j.at("score").get<std::vector<double>>(), j.at("order").get<std::vector<std::size_t>>()};
}

json intervals_json(const std::vector<Interval>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back({x.lo, x.hi});
  return a;
}

std::vector<Interval> intervals_from(const json& a) {
  std::vector<Interval> v;
  for (const auto& x : a) v.push_back({x.at(0).get<double>(), x.at(1).get<double>()});
  return v;
}

}  // namespace

ComparisonDataset read_comparisons_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    header = split_csv(line);
    break;
  }
  if (header.empty()) throw DataError("comparison CSV is empty; expected a winner,loser header");
  auto col = [&](const char* name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int cw = col("winner");
  const int cl = col("loser");
  const int cs = col("season");
  if (cw < 0 || cl < 0) {
    throw DataError("line " + std::to_string(lineno) + ": header must name winner and loser columns");
  }
  ObjectIndex objects;
  std::vector<Comparison> comps;
  std::vector<std::string> seasons;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(f.size()));
    }
    const auto& w = f[static_cast<std::size_t>(cw)];
    const auto& l = f[static_cast<std::size_t>(cl)];
    if (w.empty() || l.empty()) throw DataError("line " + std::to_string(lineno) + ": empty object label");
    if (w == l) throw DataError("line " + std::to_string(lineno) + ": object '" + w + "' compared with itself");
    const std::size_t wi = objects.intern(w);
    const std::size_t li = objects.intern(l);
    comps.push_back({wi, li, true});
    if (cs >= 0) seasons.push_back(f[static_cast<std::size_t>(cs)]);
  }
  return ComparisonDataset(std::move(objects), std::move(comps), std::move(seasons));
}

ComparisonDataset load_comparisons_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return read_comparisons_csv(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_comparisons_csv(std::ostream& out, const ComparisonDataset& data, const Provenance* prov) {
  if (prov) out << "# config_digest=" << prov->config_digest << " seed=" << prov->seed << '\n';
  const bool with_season = !data.seasons().empty();
  out << (with_season ? "winner,loser,season\n" : "winner,loser\n");
  const auto comps = data.comparisons();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    out << data.objects().label(comps[c].winner()) << ',' << data.objects().label(comps[c].loser());
    if (with_season) out << ',' << data.seasons()[c];
    out << '\n';
  }
}

std::string config_digest(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string state_to_json_string(const ModelState& state, int indent) {
  return state_json(state).dump(indent);
}

void write_state_json(std::ostream& out, const ModelState& state, const Provenance& prov,
                      const std::vector<std::string>& labels) {
  json j = state_json(state);
  j["config_digest"] = prov.config_digest;
  j["seed"] = prov.seed;
  if (!labels.empty()) j["labels"] = labels;
  out << j.dump(2) << '\n';
}

ModelState state_from_json_string(std::string_view text) { return state_from(parse_json(text, "state")); }

ModelState read_state_json(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  return state_from_json_string(ss.str());
}

void write_samples_jsonl(std::ostream& out, std::span<const ModelState> states, const Provenance& prov) {
  for (const auto& s : states) {
    json j = state_json(s);
    j["config_digest"] = prov.config_digest;
    j["seed"] = prov.seed;
    out << j.dump() << '\n';
  }
}

std::vector<ModelState> read_samples_jsonl(std::istream& in) {
  std::vector<ModelState> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(state_from_json_string(line));
    } catch (const DataError& e) {
      throw DataError("samples line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_summary_json(std::ostream& out, const PosteriorSummary& s, const Provenance& prov,
                        const Diagnostics& diagnostics) {
  json j;
  j["config_digest"] = prov.config_digest;
  j["seed"] = prov.seed;
  j["labels"] = s.labels;
  j["num_samples"] = s.num_samples;
  j["skill_mean"] = s.skill_mean;
  j["skill_ci"] = intervals_json(s.skill_ci);
  j["theta_mean"] = matrix_json(s.theta_mean);
  if (s.theta_adjusted.size() == s.num_objects()) j["theta_adjusted"] = matrix_json(s.theta_adjusted);
  j["prob_mean"] = matrix_json(s.prob_mean);
  j["K_hist"] = s.K_hist;
  j["A_hist"] = s.A_hist;
  j["by_probability"] = ranking_json(s.by_probability);
  j["p_dot_ci"] = intervals_json(s.p_dot_ci);
  j["by_ability"] = ranking_json(s.by_ability);
  j["ability_ci"] = intervals_json(s.ability_ci);
  j["diagnostics"] = diagnostics;
  out << j.dump(2) << '\n';
}

PosteriorSummary read_summary_json(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const json j = parse_json(text, "summary");
  try {
    PosteriorSummary s;
    s.labels = j.at("labels").get<std::vector<std::string>>();
    const std::size_t n = s.labels.size();
    s.num_samples = j.at("num_samples").get<std::size_t>();
    s.skill_mean = j.at("skill_mean").get<std::vector<double>>();
    s.skill_ci = intervals_from(j.at("skill_ci"));
    s.theta_mean = matrix_from(j.at("theta_mean"), n);
    if (j.contains("theta_adjusted")) s.theta_adjusted = matrix_from(j.at("theta_adjusted"), n);
    s.prob_mean = matrix_from(j.at("prob_mean"), n);
    s.K_hist = j.at("K_hist").get<std::vector<double>>();
    s.A_hist = j.at("A_hist").get<std::vector<double>>();
    s.by_probability = ranking_from(j.at("by_probability"));
    s.p_dot_ci = intervals_from(j.at("p_dot_ci"));
    s.by_ability = ranking_from(j.at("by_ability"));
    s.ability_ci = intervals_from(j.at("ability_ci"));
    if (s.skill_mean.size() != n || s.by_probability.score.size() != n || s.by_ability.score.size() != n) {
      throw DataError("summary arrays do not match the label count");
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("summary: ") + e.what());
  }
}

}  // namespace icbt
