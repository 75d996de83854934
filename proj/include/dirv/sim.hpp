#pragma once

// Synthetic worlds with known click and post-click parameters, a user
// simulator, input-ranking generators and exact ground-truth preferences.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "dirv/clickmodel.hpp"
#include "dirv/core.hpp"
#include "dirv/text.hpp"

namespace dirv {

// ---------------------------------------------------------------------------
// Post-click value distributions

struct ExponentialDwell {
  double mean = 1.0;
};

// price with probability conversion_rate, else 0.
struct ScaledBernoulli {
  double conversion_rate = 0.0;
  double price = 1.0;
};

// Dwell time with free mean and variance (gamma; exponential when var == mean^2).
struct GammaDwell {
  double mean = 1.0;
  double variance = 1.0;
};

using PostClickDist = std::variant<ExponentialDwell, ScaledBernoulli, GammaDwell>;

inline double dist_mean(const PostClickDist& d) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ScaledBernoulli>) return v.conversion_rate * v.price;
        else return v.mean;
      },
      d);
}

inline double dist_variance(const PostClickDist& d) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExponentialDwell>) return v.mean * v.mean;
        else if constexpr (std::is_same_v<T, ScaledBernoulli>)
          return v.price * v.price * v.conversion_rate * (1.0 - v.conversion_rate);
        else return v.variance;
      },
      d);
}

inline double dist_sample(const PostClickDist& d, Rng& rng) {
  return std::visit(
      [&rng](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExponentialDwell>) {
          return std::exponential_distribution<double>(1.0 / v.mean)(rng);
        } else if constexpr (std::is_same_v<T, ScaledBernoulli>) {
          return std::bernoulli_distribution(v.conversion_rate)(rng) ? v.price : 0.0;
        } else {
          if (v.variance <= 0.0) return v.mean;
          const double shape = v.mean * v.mean / v.variance;
          return std::gamma_distribution<double>(shape, v.variance / v.mean)(rng);
        }
      },
      d);
}

struct GroundTruthItem {
  ItemId id{};
  double attraction = 0.0;
  PostClickDist post_click = ExponentialDwell{};

  double mean() const { return dist_mean(post_click); }
  double variance() const { return dist_variance(post_click); }
};

using World = std::map<ItemId, GroundTruthItem>;

inline const GroundTruthItem& world_item(const World& world, ItemId id) {
  auto it = world.find(id);
  if (it == world.end()) throw DomainError("item " + to_string(id) + " is not in the world");
  return it->second;
}

// ---------------------------------------------------------------------------
// Users

struct UserBehaviorKind {
  enum class Variant { cascade_sim, position_based_sim };

  Variant variant = Variant::cascade_sim;
  std::vector<double> position_probs;  // by zero-based rank

  static UserBehaviorKind cascade() { return {}; }
  static UserBehaviorKind position_based(std::vector<double> probs) {
    ClickModelKind::position_based(probs);  // validates
    return {Variant::position_based_sim, std::move(probs)};
  }

  double examination(std::size_t rank) const {
    if (rank >= position_probs.size()) {
      throw DomainError("no user examination probability for rank " + std::to_string(rank + 1));
    }
    return position_probs[rank];
  }
};

// Cascade users scan top-down and leave after the first click. Position-based
// users examine each rank independently with its probability.
inline ImpressionRecord simulate_impression(const Ranking& r, const World& world,
                                            const UserBehaviorKind& behavior, Rng& rng) {
  for (ItemId id : r) world_item(world, id);  // unknown items fail even below a cascade stop
  ImpressionRecord rec = ImpressionRecord::no_clicks(r);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k = 0; k < r.depth(); ++k) {
    const GroundTruthItem& item = world_item(world, r[k]);
    if (behavior.variant == UserBehaviorKind::Variant::position_based_sim) {
      if (u(rng) >= behavior.examination(k)) continue;
    }
    if (u(rng) < item.attraction) {
      rec.clicks[k] = true;
      rec.post_clicks[k] = dist_sample(item.post_click, rng);
      if (behavior.variant == UserBehaviorKind::Variant::cascade_sim) break;
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Worlds

// E-commerce: attraction ~ U(0, 0.5), price ~ U(1, 1000), conversion ~ U(0, 0.5).
// Items are numbered 1..n.
inline World gen_ec_world(std::size_t n, Rng& rng) {
  if (n == 0) throw ConfigError("an EC world needs at least one item");
  std::uniform_real_distribution<double> attraction(0.0, 0.5), price(1.0, 1000.0), conversion(0.0, 0.5);
  World world;
  for (std::size_t i = 1; i <= n; ++i) {
    GroundTruthItem item;
    item.id = ItemId{static_cast<std::int64_t>(i)};
    item.attraction = attraction(rng);
    const double p = price(rng);
    item.post_click = ScaledBernoulli{conversion(rng), p};
    world.emplace(item.id, item);
  }
  return world;
}

// Relevance-labelled items: mean dwell (rel+1) * U(1, 20) with exponential
// dwell times, attraction min((rel+1) * U(0, 0.5), 1).
inline double letor_mean_dwell(int relevance, double u_1_20) { return (relevance + 1) * u_1_20; }
inline double letor_attraction(int relevance, double u_0_half) { return std::min((relevance + 1) * u_0_half, 1.0); }

inline World gen_letor_world(const std::map<ItemId, int>& relevance, Rng& rng) {
  std::uniform_real_distribution<double> dwell(1.0, 20.0), attraction(0.0, 0.5);
  World world;
  for (const auto& [id, rel] : relevance) {
    if (rel < 0 || rel > 2) {
      throw DataError("relevance label " + std::to_string(rel) + " for item " + to_string(id) +
                      " is outside {0,1,2}");
    }
    GroundTruthItem item;
    item.id = id;
    item.post_click = ExponentialDwell{letor_mean_dwell(rel, dwell(rng))};
    item.attraction = letor_attraction(rel, attraction(rng));
    world.emplace(id, item);
  }
  return world;
}

// `item_id,relevance`
inline std::map<ItemId, int> load_relevance(const std::string& path) {
  std::map<ItemId, int> out;
  for (const auto& [n, line] : text::read_lines(path)) {
    if (line[0] == '#') continue;
    auto f = text::split(line, ',');
    auto id = f.size() == 2 ? text::to_int(f[0]) : std::nullopt;
    auto rel = f.size() == 2 ? text::to_int(f[1]) : std::nullopt;
    if (!id || !rel) {
      if (n == 1 && f.size() == 2) continue;  // header
      throw DataError(path + ":" + std::to_string(n) + ": expected item_id,relevance");
    }
    if (*rel < 0 || *rel > 2) {
      throw DataError(path + ":" + std::to_string(n) + ": relevance must be 0, 1 or 2");
    }
    out[ItemId{*id}] = static_cast<int>(*rel);
  }
  return out;
}

// `item_id,attraction,mean_dwell,var_dwell`; dwell times are gamma distributed.
inline World load_news_world(const std::string& path) {
  World world;
  for (const auto& [n, line] : text::read_lines(path)) {
    if (line[0] == '#') continue;
    auto f = text::split(line, ',');
    std::optional<std::int64_t> id;
    std::optional<double> a, m, v;
    if (f.size() == 4) {
      id = text::to_int(f[0]);
      a = text::to_double(f[1]);
      m = text::to_double(f[2]);
      v = text::to_double(f[3]);
    }
    if (!id || !a || !m || !v) {
      if (n == 1 && f.size() == 4) continue;  // header
      throw DataError(path + ":" + std::to_string(n) + ": expected item_id,attraction,mean_dwell,var_dwell");
    }
    if (*a < 0.0 || *a > 1.0 || *m <= 0.0 || *v < 0.0) {
      throw DataError(path + ":" + std::to_string(n) + ": parameter out of range");
    }
    GroundTruthItem item{ItemId{*id}, *a, GammaDwell{*m, *v}};
    world.emplace(item.id, item);
  }
  if (world.empty()) throw DataError(path + ": no items");
  return world;
}

// ---------------------------------------------------------------------------
// Input rankings

// Every ranking holds the global top-k items by attraction * mean plus
// depth - k items that no other ranking uses, in shuffled order.
inline RankingSet gen_input_rankings(const World& world, std::size_t k, std::size_t num_rankings,
                                     std::size_t depth, Rng& rng) {
  if (k > depth) throw ConfigError("duplication k exceeds the ranking depth");
  if (num_rankings < 2) throw ConfigError("need at least two input rankings");
  if (depth == 0) throw ConfigError("ranking depth must be positive");
  const std::size_t needed = k + num_rankings * (depth - k);
  if (world.size() < needed) {
    throw ConfigError("world has " + std::to_string(world.size()) + " items but " + std::to_string(needed) +
                      " are needed for these input rankings");
  }
  std::vector<const GroundTruthItem*> items;
  for (const auto& [id, item] : world) items.push_back(&item);
  std::stable_sort(items.begin(), items.end(), [](const GroundTruthItem* a, const GroundTruthItem* b) {
    return a->attraction * a->mean() > b->attraction * b->mean();
  });
  std::vector<ItemId> top, rest;
  for (std::size_t i = 0; i < items.size(); ++i) (i < k ? top : rest).push_back(items[i]->id);
  std::sort(rest.begin(), rest.end());
  std::shuffle(rest.begin(), rest.end(), rng);

  std::vector<Ranking> rankings;
  std::size_t next = 0;
  for (std::size_t r = 0; r < num_rankings; ++r) {
    std::vector<ItemId> v = top;
    for (std::size_t j = k; j < depth; ++j) v.push_back(rest[next++]);
    std::shuffle(v.begin(), v.end(), rng);
    rankings.emplace_back(std::move(v));
  }
  return RankingSet(std::move(rankings));
}

struct FeatureTable {
  std::vector<std::string> columns;
  std::map<ItemId, std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw DataError("feature column '" + name + "' not found");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

// Header `item_id,<feature names...>` followed by numeric rows.
inline FeatureTable load_feature_table(const std::string& path) {
  auto lines = text::read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty feature table");
  FeatureTable t;
  auto header = text::split(lines[0].second, ',');
  if (header.size() < 2 || header[0] != "item_id") {
    throw DataError(path + ": header must be item_id,<feature names...>");
  }
  t.columns.assign(header.begin() + 1, header.end());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [n, line] = lines[i];
    auto f = text::split(line, ',');
    if (f.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(n) + ": expected " + std::to_string(header.size()) + " fields");
    }
    auto id = text::to_int(f[0]);
    if (!id) throw DataError(path + ":" + std::to_string(n) + ": bad item_id");
    std::vector<double> row;
    for (std::size_t c = 1; c < f.size(); ++c) {
      auto v = text::to_double(f[c]);
      if (!v) throw DataError(path + ":" + std::to_string(n) + ": bad value for " + header[c]);
      row.push_back(*v);
    }
    t.rows[ItemId{*id}] = std::move(row);
  }
  return t;
}

// Keeps `count` items chosen uniformly at random (all items when fewer).
inline FeatureTable sample_items(const FeatureTable& t, std::size_t count, Rng& rng) {
  std::vector<ItemId> ids;
  for (const auto& [id, row] : t.rows) ids.push_back(id);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(std::min(count, ids.size()));
  FeatureTable out{t.columns, {}};
  for (ItemId id : ids) out.rows[id] = t.rows.at(id);
  return out;
}

// One ranking per feature: items by descending value, ties to the smaller id.
inline RankingSet letor_input_rankings(const FeatureTable& t, const std::vector<std::string>& features,
                                       std::size_t depth) {
  if (t.rows.size() < depth) {
    throw DataError("feature table has " + std::to_string(t.rows.size()) + " items, fewer than depth " +
                    std::to_string(depth));
  }
  std::vector<Ranking> rankings;
  for (const auto& name : features) {
    const std::size_t c = t.column(name);
    std::vector<std::pair<ItemId, double>> v;
    for (const auto& [id, row] : t.rows) v.emplace_back(id, row[c]);
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<ItemId> ids;
    for (std::size_t i = 0; i < depth; ++i) ids.push_back(v[i].first);
    rankings.emplace_back(std::move(ids));
  }
  return RankingSet(std::move(rankings));
}

// ---------------------------------------------------------------------------
// Ground truth

// True click probabilities of a ranking under the user behavior.
inline std::vector<double> true_click_probs(const Ranking& r, const World& world,
                                            const UserBehaviorKind& behavior) {
  std::vector<double> c(r.depth());
  double exam = 1.0;
  for (std::size_t k = 0; k < r.depth(); ++k) {
    const double a = world_item(world, r[k]).attraction;
    if (behavior.variant == UserBehaviorKind::Variant::position_based_sim) {
      c[k] = behavior.examination(k) * a;
    } else {
      c[k] = exam * a;
      exam *= 1.0 - a;
    }
  }
  return c;
}

inline double true_ranking_metric(const Ranking& r, const World& world, const UserBehaviorKind& behavior) {
  const auto c = true_click_probs(r, world, behavior);
  double s = 0.0;
  for (std::size_t k = 0; k < r.depth(); ++k) s += c[k] * world_item(world, r[k]).mean();
  return s;
}

inline std::vector<double> true_ranking_metrics(const RankingSet& rankings, const World& world,
                                                const UserBehaviorKind& behavior) {
  std::vector<double> m;
  for (const auto& r : rankings.rankings()) m.push_back(true_ranking_metric(r, world, behavior));
  return m;
}

inline PreferenceMatrix ground_truth_preference(const RankingSet& rankings, const World& world,
                                                const UserBehaviorKind& behavior = UserBehaviorKind::cascade()) {
  const auto m = true_ranking_metrics(rankings, world, behavior);
  return PreferenceMatrix::from_metrics(m);
}

}  // namespace dirv
