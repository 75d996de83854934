#pragma once

// Experiment configuration: flat `key = value` text, `#` starts a comment.
// Unknown keys are errors. Relative file paths resolve against the directory
// of the config file.

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dirv/clickmodel.hpp"
#include "dirv/interleave.hpp"
#include "dirv/sim.hpp"
#include "dirv/text.hpp"

namespace dirv {

struct ExperimentConfig {
  enum class Mode { simulate, replay };
  enum class Dataset { ec, letor, news };
  enum class Predictor { oracle_noise, constant, table };

  Mode mode = Mode::simulate;
  Dataset dataset = Dataset::ec;
  PolicyKind policy;
  std::size_t num_impressions = 10000;
  std::size_t num_repeats = 30;
  std::size_t num_rankings = 5;
  std::size_t depth = 10;
  std::size_t duplication_k = 0;
  std::size_t num_items = 50;
  std::uint64_t seed = 1;
  std::size_t checkpoint_interval = 100;
  std::string output = "results";

  UserBehaviorKind behavior = UserBehaviorKind::cascade();
  ClickModelKind click_model = ClickModelKind::cascade();

  Predictor predictor = Predictor::oracle_noise;
  double predictor_noise_bound = 2.0;
  double predictor_constant = 0.0;
  std::string predictor_file;

  std::string relevance_file;
  std::string feature_file;
  std::vector<std::string> features;
  std::size_t letor_sample_items = 20;

  std::string world_file;

  bool replay_swap_halves = false;
  std::size_t threads = 1;

  void validate() const {
    if (num_repeats == 0) throw ConfigError("num_repeats must be positive");
    if (depth == 0) throw ConfigError("depth must be positive");
    if (checkpoint_interval == 0) throw ConfigError("checkpoint_interval must be positive");
    if (policy.gamma < 0.0) throw ConfigError("gamma must be nonnegative");
    if (mode == Mode::simulate) {
      if (duplication_k > depth) throw ConfigError("duplication_k must not exceed depth");
      if (dataset == Dataset::letor) {
        if (relevance_file.empty() || feature_file.empty()) {
          throw ConfigError("the letor dataset needs relevance_file and feature_file");
        }
        if (features.size() < 2) throw ConfigError("the letor dataset needs at least two features");
      } else if (num_rankings < 2) {
        throw ConfigError("num_rankings must be at least 2");
      }
      if (dataset == Dataset::news && world_file.empty()) throw ConfigError("the news dataset needs world_file");
      if (behavior.variant == UserBehaviorKind::Variant::position_based_sim && behavior.position_probs.size() < depth) {
        throw ConfigError("behavior_position_probs must cover every rank up to depth");
      }
    } else if (policy.variant == PolicyKind::Variant::tdm) {
      throw ConfigError("team-draft cannot be replayed: its rankings need not exist in the log");
    }
    if (click_model.variant == ClickModelKind::Variant::position_based && click_model.position_probs.size() < depth) {
      throw ConfigError("click_model_position_probs must cover every rank up to depth");
    }
    if (predictor == Predictor::table && predictor_file.empty()) {
      throw ConfigError("predictor = table needs predictor_file");
    }
  }

  VariancePredictor make_predictor() const {
    switch (predictor) {
      case Predictor::oracle_noise: return VariancePredictor::oracle_noise(predictor_noise_bound);
      case Predictor::constant: return VariancePredictor::constant(predictor_constant);
      case Predictor::table: return VariancePredictor::load_table(predictor_file);
    }
    return VariancePredictor::constant(0.0);
  }
};

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  auto n = text::to_int(v);
  if (!n || *n < 0) throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::size_t>(*n);
}

inline double parse_real(const std::string& key, const std::string& v) {
  auto d = text::to_double(v);
  if (!d) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return *d;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& f : text::split(v, ',')) out.push_back(parse_real(key, f));
  return out;
}

template <typename E>
E parse_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> choices) {
  std::string names;
  for (const auto& [name, value] : choices) {
    if (v == name) return value;
    names += names.empty() ? name : std::string(" | ") + name;
  }
  throw ConfigError(key + ": expected " + names + ", got '" + v + "'");
}

}  // namespace detail

// Applies one key. Throws ConfigError for unknown keys or bad values. Position
// tables and the kinds they refine may appear in either order.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                             const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  using C = ExperimentConfig;
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    return (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
  };
  if (key == "mode") {
    cfg.mode = parse_enum<C::Mode>(key, value, {{"simulate", C::Mode::simulate}, {"replay", C::Mode::replay}});
  } else if (key == "dataset") {
    cfg.dataset = parse_enum<C::Dataset>(
        key, value, {{"ec", C::Dataset::ec}, {"letor", C::Dataset::letor}, {"news", C::Dataset::news}});
  } else if (key == "policy") {
    cfg.policy.variant = parse_policy(value);
  } else if (key == "gamma") {
    cfg.policy.gamma = parse_real(key, value);
  } else if (key == "num_impressions") {
    cfg.num_impressions = parse_count(key, value);
  } else if (key == "num_repeats") {
    cfg.num_repeats = parse_count(key, value);
  } else if (key == "num_rankings") {
    cfg.num_rankings = parse_count(key, value);
  } else if (key == "depth") {
    cfg.depth = parse_count(key, value);
  } else if (key == "duplication_k") {
    cfg.duplication_k = parse_count(key, value);
  } else if (key == "num_items") {
    cfg.num_items = parse_count(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_count(key, value);
  } else if (key == "checkpoint_interval") {
    cfg.checkpoint_interval = parse_count(key, value);
  } else if (key == "output") {
    cfg.output = path(value);
  } else if (key == "behavior") {
    const bool pb = parse_enum<bool>(key, value, {{"cascade", false}, {"position_based", true}});
    cfg.behavior = pb ? UserBehaviorKind{UserBehaviorKind::Variant::position_based_sim, cfg.behavior.position_probs}
                      : UserBehaviorKind::cascade();
  } else if (key == "behavior_position_probs") {
    auto probs = parse_reals(key, value);
    ClickModelKind::position_based(probs);
    cfg.behavior.position_probs = std::move(probs);
  } else if (key == "click_model") {
    const auto v = parse_enum<ClickModelKind::Variant>(
        key, value,
        {{"cascade", ClickModelKind::Variant::cascade},
         {"compounded_cascade", ClickModelKind::Variant::compounded_cascade},
         {"position_based", ClickModelKind::Variant::position_based}});
    cfg.click_model.variant = v;
  } else if (key == "click_model_position_probs") {
    cfg.click_model.position_probs = ClickModelKind::position_based(parse_reals(key, value)).position_probs;
  } else if (key == "predictor") {
    cfg.predictor = parse_enum<C::Predictor>(key, value,
                                             {{"oracle_noise", C::Predictor::oracle_noise},
                                              {"constant", C::Predictor::constant},
                                              {"table", C::Predictor::table}});
  } else if (key == "predictor_noise_bound") {
    cfg.predictor_noise_bound = parse_real(key, value);
  } else if (key == "predictor_constant") {
    cfg.predictor_constant = parse_real(key, value);
  } else if (key == "predictor_file") {
    cfg.predictor_file = path(value);
  } else if (key == "relevance_file") {
    cfg.relevance_file = path(value);
  } else if (key == "feature_file") {
    cfg.feature_file = path(value);
  } else if (key == "features") {
    cfg.features = text::split(value, ',');
  } else if (key == "letor_sample_items") {
    cfg.letor_sample_items = parse_count(key, value);
  } else if (key == "world_file") {
    cfg.world_file = path(value);
  } else if (key == "replay_swap_halves") {
    cfg.replay_swap_halves = parse_bool(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_count(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& name = "<config>",
                                     const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (text::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(name + ":" + std::to_string(n) + ": expected key = value");
    const std::string key(text::trim(std::string_view(line).substr(0, eq)));
    const std::string value(text::trim(std::string_view(line).substr(eq + 1)));
    try {
      set_config_value(cfg, key, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(name + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& s) {
  std::istringstream in(s);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, path, std::filesystem::path(path).parent_path());
}

}  // namespace dirv
