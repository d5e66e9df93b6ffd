#include "icbt_cli/config.h"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <toml.hpp>

#include "icbt/errors.h"
#include "icbt/io.h"

namespace icbt::cli {

Hyperparameters RunConfig::hyperparameters_for(std::size_t n) const {
  Hyperparameters h = fit.h;
  h.lambda_A = lambda_A ? *lambda_A : Hyperparameters::defaults_for(n).lambda_A;
  return h;
}

FitConfig RunConfig::fit_for(std::size_t n) const {
  FitConfig f = fit;
  f.h = hyperparameters_for(n);
  f.default_hyperparameters = false;
  return f;
}

void RunConfig::validate() const {
  Hyperparameters h = fit.h;
  h.lambda_A = lambda_A.value_or(1.0);
  h.validate();
  fit.init.validate();
  fit.schedule.validate();
  if (fit.chains < 1) throw std::invalid_argument("chains must be >= 1");
  if (!(fit.bt.ridge >= 0.0)) throw std::invalid_argument("bt.ridge must be >= 0");
  if (!(fit.bt.tol > 0.0) || fit.bt.max_iter < 1) throw std::invalid_argument("bt.tol and bt.max_iter must be positive");
  if (!(rhat_threshold >= 1.0)) throw std::invalid_argument("rhat_threshold must be >= 1");
  if (simulate.rounds < 1) throw std::invalid_argument("simulate.rounds must be >= 1");
  if (!(simulate.skill_sd > 0.0)) throw std::invalid_argument("simulate.skill_sd must be positive");
  if (simulate.scenario < 1 || simulate.scenario > 4) throw std::invalid_argument("simulate.scenario must be 1..4");
  if (!(evaluate.train_fraction > 0.0 && evaluate.train_fraction < 1.0)) {
    throw std::invalid_argument("evaluate.train_fraction must lie in (0, 1)");
  }
  if (evaluate.replicates < 1) throw std::invalid_argument("evaluate.replicates must be >= 1");
  if (!(evaluate.ci_level > 0.0 && evaluate.ci_level < 1.0)) throw std::invalid_argument("evaluate.ci_level must lie in (0, 1)");
}

namespace {

// Reads the keys of one table and rejects any it does not know.
class Section {
 public:
  Section(const toml::table& table, std::string name) : table_(table), name_(std::move(name)) {}

  void number(std::string_view key, double& out) {
    if (const auto* node = take(key)) {
      auto v = node->value<double>();
      if (!v || !(node->is_floating_point() || node->is_integer())) fail(key, "a number");
      out = *v;
    }
  }
  template <class Int>
  void integer(std::string_view key, Int& out) {
    if (const auto* node = take(key)) {
      auto v = node->value_exact<std::int64_t>();
      if (!v) fail(key, "an integer");
      out = static_cast<Int>(*v);
    }
  }
  void boolean(std::string_view key, bool& out) {
    if (const auto* node = take(key)) {
      auto v = node->value_exact<bool>();
      if (!v) fail(key, "true or false");
      out = *v;
    }
  }
  const toml::node* take(std::string_view key) {
    seen_.insert(std::string(key));
    return table_.get(key);
  }
  const toml::table* subtable(std::string_view key) {
    const toml::node* node = take(key);
    if (!node) return nullptr;
    if (!node->is_table()) fail(key, "a table");
    return node->as_table();
  }
  void finish() const {
    for (const auto& [k, v] : table_) {
      if (!seen_.count(std::string(k.str()))) {
        throw DataError("unknown config key '" + qualified(k.str()) + "'");
      }
    }
  }
  [[noreturn]] void fail(std::string_view key, std::string_view what) const {
    throw DataError("config key '" + qualified(key) + "' must be " + std::string(what));
  }

 private:
  std::string qualified(std::string_view key) const {
    return name_.empty() ? std::string(key) : name_ + "." + std::string(key);
  }

  const toml::table& table_;
  std::string name_;
  std::set<std::string> seen_;
};

template <class Fn>
void with_section(Section& parent, const char* key, const std::string& name, Fn&& fn) {
  if (const toml::table* t = parent.subtable(key)) {
    Section s(*t, name);
    fn(s);
    s.finish();
  }
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << " line " << e.source().begin.line << ": " << e.description();
    throw DataError(msg.str());
  }
  RunConfig c;
  Section top(root, "");
  top.integer("seed", c.seed);
  top.integer("chains", c.fit.chains);
  top.number("rhat_threshold", c.rhat_threshold);

  with_section(top, "hyperparameters", "hyperparameters", [&](Section& s) {
    Hyperparameters& h = c.fit.h;
    s.number("lambda_K", h.lambda_K);
    if (const auto* node = s.take("lambda_A")) {
      if (auto str = node->value_exact<std::string>()) {
        if (*str != "n/2") s.fail("lambda_A", "a number or \"n/2\"");
        c.lambda_A.reset();
      } else if (auto v = node->value<double>()) {
        c.lambda_A = *v;
      } else {
        s.fail("lambda_A", "a number or \"n/2\"");
      }
    }
    s.number("gamma_K", h.gamma_K);
    s.number("gamma_A", h.gamma_A);
    s.number("nu_A", h.nu_A);
    s.number("alpha", h.alpha);
    s.number("beta", h.beta);
    if (const auto* node = s.take("a_normalizer")) {
      auto v = node->value_exact<std::string>();
      if (v == "printed") {
        h.a_normalizer = TruncationNormalizer::kPrinted;
      } else if (v == "support") {
        h.a_normalizer = TruncationNormalizer::kSupport;
      } else {
        s.fail("a_normalizer", "\"printed\" or \"support\"");
      }
    }
    if (const auto* node = s.take("phi_factor")) {
      auto v = node->value_exact<std::string>();
      if (v == "normalized") {
        h.phi_factor = SkillOrderFactor::kNormalized;
      } else if (v == "printed") {
        h.phi_factor = SkillOrderFactor::kPrinted;
      } else {
        s.fail("phi_factor", "\"normalized\" or \"printed\"");
      }
    }
    s.boolean("dma_count_coefficient", h.dma_count_coefficient);
  });

  with_section(top, "bt", "bt", [&](Section& s) {
    s.number("ridge", c.fit.bt.ridge);
    s.number("tol", c.fit.bt.tol);
    s.integer("max_iter", c.fit.bt.max_iter);
  });

  with_section(top, "init", "init", [&](Section& s) {
    InitConfig& ic = c.fit.init;
    s.number("alpha_p", ic.alpha_p);
    s.number("beta_p", ic.beta_p);
    s.integer("K_min", ic.K_min);
    s.integer("K_max", ic.K_max);
    s.integer("A_min", ic.A_min);
    s.integer("A_max", ic.A_max);
    s.integer("kmeans_restarts", ic.kmeans_restarts);
    s.integer("stage1_iterations", ic.stage_lengths[0]);
    s.integer("stage2_iterations", ic.stage_lengths[1]);
  });

  with_section(top, "sampler", "sampler", [&](Section& s) {
    SamplerSchedule& sc = c.fit.schedule;
    s.integer("iterations", sc.iterations);
    s.integer("burn_in", sc.burn_in);
    s.integer("thin", sc.thin);
    s.number("rw_step_theta", sc.rw_step_theta);
    s.number("rw_step_phi", sc.rw_step_phi);
    s.number("sigma_split", sc.sigma_split);
    s.boolean("adapt_burnin", sc.adapt_burnin);
    s.number("target_acceptance", sc.target_acceptance);
    s.integer("max_K", sc.max_K);
    s.integer("max_A", sc.max_A);
    s.boolean("validate_each_move", sc.validate_each_move);
    with_section(s, "moves", "sampler.moves", [&](Section& m) {
      m.number("update_levels", sc.moves.update_levels);
      m.number("reallocate", sc.moves.reallocate);
      m.number("split_merge_theta", sc.moves.split_merge_theta);
      m.number("split_merge_phi", sc.moves.split_merge_phi);
      m.number("add_delete_theta", sc.moves.add_delete_theta);
      m.number("add_delete_phi", sc.moves.add_delete_phi);
    });
  });

  with_section(top, "simulate", "simulate", [&](Section& s) {
    s.integer("scenario", c.simulate.scenario);
    s.integer("rounds", c.simulate.rounds);
    s.number("skill_sd", c.simulate.skill_sd);
  });

  with_section(top, "evaluate", "evaluate", [&](Section& s) {
    s.number("train_fraction", c.evaluate.train_fraction);
    s.integer("replicates", c.evaluate.replicates);
    if (const auto* node = s.take("prediction")) {
      auto v = node->value_exact<std::string>();
      if (v == "posterior_mean") {
        c.evaluate.prediction = PredictionMode::kPosteriorMeanProbability;
      } else if (v == "plug_in") {
        c.evaluate.prediction = PredictionMode::kPlugIn;
      } else {
        s.fail("prediction", "\"posterior_mean\" or \"plug_in\"");
      }
    }
    s.integer("spearman_permutations", c.evaluate.spearman_permutations);
    s.number("ci_level", c.evaluate.ci_level);
  });
  top.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string canonical_config(const RunConfig& c) {
  const Hyperparameters& h = c.fit.h;
  toml::table hyper{
      {"lambda_K", h.lambda_K},
      {"gamma_K", h.gamma_K},
      {"gamma_A", h.gamma_A},
      {"nu_A", h.nu_A},
      {"alpha", h.alpha},
      {"beta", h.beta},
      {"a_normalizer", h.a_normalizer == TruncationNormalizer::kPrinted ? "printed" : "support"},
      {"phi_factor", h.phi_factor == SkillOrderFactor::kNormalized ? "normalized" : "printed"},
      {"dma_count_coefficient", h.dma_count_coefficient},
  };
  if (c.lambda_A) {
    hyper.insert("lambda_A", *c.lambda_A);
  } else {
    hyper.insert("lambda_A", "n/2");
  }
  const InitConfig& ic = c.fit.init;
  const SamplerSchedule& sc = c.fit.schedule;
  toml::table root{
      {"seed", static_cast<std::int64_t>(c.seed)},
      {"chains", c.fit.chains},
      {"rhat_threshold", c.rhat_threshold},
      {"hyperparameters", hyper},
      {"bt", toml::table{{"ridge", c.fit.bt.ridge}, {"tol", c.fit.bt.tol}, {"max_iter", c.fit.bt.max_iter}}},
      {"init", toml::table{{"alpha_p", ic.alpha_p},
                           {"beta_p", ic.beta_p},
                           {"K_min", ic.K_min},
                           {"K_max", ic.K_max},
                           {"A_min", ic.A_min},
                           {"A_max", ic.A_max},
                           {"kmeans_restarts", ic.kmeans_restarts},
                           {"stage1_iterations", static_cast<std::int64_t>(ic.stage_lengths[0])},
                           {"stage2_iterations", static_cast<std::int64_t>(ic.stage_lengths[1])}}},
      {"sampler", toml::table{{"iterations", static_cast<std::int64_t>(sc.iterations)},
                              {"burn_in", static_cast<std::int64_t>(sc.burn_in)},
                              {"thin", static_cast<std::int64_t>(sc.thin)},
                              {"rw_step_theta", sc.rw_step_theta},
                              {"rw_step_phi", sc.rw_step_phi},
                              {"sigma_split", sc.sigma_split},
                              {"adapt_burnin", sc.adapt_burnin},
                              {"target_acceptance", sc.target_acceptance},
                              {"max_K", sc.max_K},
                              {"max_A", sc.max_A},
                              {"validate_each_move", sc.validate_each_move},
                              {"moves", toml::table{{"update_levels", sc.moves.update_levels},
                                                    {"reallocate", sc.moves.reallocate},
                                                    {"split_merge_theta", sc.moves.split_merge_theta},
                                                    {"split_merge_phi", sc.moves.split_merge_phi},
                                                    {"add_delete_theta", sc.moves.add_delete_theta},
                                                    {"add_delete_phi", sc.moves.add_delete_phi}}}}},
      {"simulate", toml::table{{"scenario", c.simulate.scenario},
                               {"rounds", c.simulate.rounds},
                               {"skill_sd", c.simulate.skill_sd}}},
      {"evaluate", toml::table{{"train_fraction", c.evaluate.train_fraction},
                               {"replicates", c.evaluate.replicates},
                               {"prediction", c.evaluate.prediction == PredictionMode::kPlugIn ? "plug_in"
                                                                                               : "posterior_mean"},
                               {"spearman_permutations", static_cast<std::int64_t>(c.evaluate.spearman_permutations)},
                               {"ci_level", c.evaluate.ci_level}}},
  };
  std::ostringstream out;
  out << root << '\n';
  return out.str();
}

std::string digest_of(const RunConfig& config) { return config_digest(canonical_config(config)); }

}  // namespace icbt::cli
