#pragma once

// Post-click metric estimators. A ranking's metric is estimated as
//   sum over positions of P(click | position) * mean post-click value of the item,
// where item means pool samples from every ranking the item was shown in.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dirv/clickmodel.hpp"
#include "dirv/core.hpp"

namespace dirv {

inline Estimate item_mean(const ItemStats& s, double fallback = 0.0) {
  if (s.n_click == 0) return {fallback, true};
  return {s.sum_x / static_cast<double>(s.n_click), false};
}

// Unbiased sample variance; nullopt below two samples.
inline std::optional<double> item_variance(const ItemStats& s) {
  if (s.n_click < 2) return std::nullopt;
  const double n = static_cast<double>(s.n_click);
  const double v = (s.sum_x2 - s.sum_x * s.sum_x / n) / (n - 1.0);
  return std::max(v, 0.0);
}

inline double clipped_variance(std::optional<double> observed, double predicted) {
  if (predicted < 0.0) throw DomainError("predicted variance must be nonnegative");
  return observed ? std::max(*observed, predicted) : predicted;
}

inline double ranking_metric_estimate(std::span<const double> click_probs,
                                      std::span<const double> means) {
  if (click_probs.size() != means.size()) throw DomainError("click/mean length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < click_probs.size(); ++k) s += click_probs[k] * means[k];
  return s;
}

// Click-model estimate for any ranking over the universe, using global tallies.
inline double ranking_metric_estimate(const Ranking& r, const ExperimentState& state,
                                      const ClickModelKind& kind) {
  if (r.empty()) throw DomainError("cannot estimate an empty ranking");
  std::vector<double> attraction, means;
  for (ItemId id : r) {
    const ItemStats& s = state.item(id);
    attraction.push_back(estimate_attraction(s).value);
    means.push_back(item_mean(s).value);
  }
  return ranking_metric_estimate(click_probs(attraction, kind), means);
}

// Model-agnostic click-through rate of d inside input ranking r.
inline Estimate model_agnostic_ctr(const Ranking& r, const PerRankingStats& prs, ItemId d) {
  if (!r.contains(d)) throw DomainError("item " + to_string(d) + " is not in the ranking");
  if (prs.n_impr_ranking == 0) return {0.0, true};
  return {static_cast<double>(prs.clicks_on(d)) / static_cast<double>(prs.n_impr_ranking), false};
}

// Weight on the click model: 1 / sqrt(n + 1).
inline double blend_weight(std::uint64_t n_impr_ranking) {
  return 1.0 / std::sqrt(static_cast<double>(n_impr_ranking) + 1.0);
}

inline double blended_click_prob(double model_prob, double ctr, std::uint64_t n_impr_ranking) {
  const double theta = blend_weight(n_impr_ranking);
  return theta * model_prob + (1.0 - theta) * ctr;
}

// ---------------------------------------------------------------------------
// Variance prediction

class VariancePredictor {
 public:
  enum class Kind { oracle_noise, constant, table };

  static VariancePredictor oracle_noise(double bound_factor = 2.0) {
    if (!(bound_factor >= 0.0)) throw ConfigError("noise bound must be nonnegative");
    VariancePredictor p;
    p.kind_ = Kind::oracle_noise;
    p.value_ = bound_factor;
    return p;
  }

  static VariancePredictor constant(double v) {
    if (!(v >= 0.0)) throw ConfigError("constant predicted variance must be nonnegative");
    VariancePredictor p;
    p.kind_ = Kind::constant;
    p.value_ = v;
    return p;
  }

  static VariancePredictor table(std::unordered_map<ItemId, double> t) {
    for (const auto& [id, v] : t) {
      if (!(v >= 0.0)) throw ConfigError("predicted variance for item " + to_string(id) + " is negative");
    }
    VariancePredictor p;
    p.kind_ = Kind::table;
    p.table_ = std::move(t);
    return p;
  }

  // Reads `item_id,predicted_variance` lines; a non-numeric first line is a header.
  static VariancePredictor load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open variance table '" + path + "'");
    std::unordered_map<ItemId, double> t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::string a, b;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
        throw DataError(path + ":" + std::to_string(lineno) + ": expected item_id,predicted_variance");
      }
      try {
        t[ItemId{std::stoll(a)}] = std::stod(b);
      } catch (const std::exception&) {
        if (lineno == 1) continue;
        throw DataError(path + ":" + std::to_string(lineno) + ": malformed number");
      }
    }
    return table(std::move(t));
  }

  Kind kind() const { return kind_; }

  double predict(ItemId d, std::optional<double> truth, Rng& rng) const {
    switch (kind_) {
      case Kind::oracle_noise: {
        if (!truth) throw ConfigError("oracle-noise variance prediction needs the true variance");
        std::uniform_real_distribution<double> u(0.0, value_ * *truth);
        return value_ * *truth > 0.0 ? u(rng) : 0.0;
      }
      case Kind::constant:
        return value_;
      case Kind::table: {
        auto it = table_.find(d);
        return it == table_.end() ? 0.0 : it->second;
      }
    }
    return 0.0;
  }

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  std::unordered_map<ItemId, double> table_;
};

inline double predict_variance(const VariancePredictor& pred, ItemId d, std::optional<double> truth,
                               Rng& rng) {
  return pred.predict(d, truth, rng);
}

// ---------------------------------------------------------------------------
// Snapshot of every estimate the interleaver needs, computed once per
// impression from the current tallies.

struct EstimatorOptions {
  ClickModelKind click_model = ClickModelKind::cascade();
  // Blend the click model with per-ranking click-through rates.
  bool error_correction = true;
  double attraction_prior = 0.0;
  double mean_default = 0.0;
};

class EstimatorSnapshot {
 public:
  // `predicted_variance` is aligned with state.universe(); empty means zero.
  // The snapshot keeps a pointer to `state`, which must outlive it.
  EstimatorSnapshot(const ExperimentState& state, const EstimatorOptions& opt,
                    std::span<const double> predicted_variance = {})
      : state_(&state), opt_(opt) {
    const std::size_t n = state.num_items();
    attraction_.resize(n);
    mean_.resize(n);
    variance_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const ItemStats& s = state.item_at(i);
      attraction_[i] = estimate_attraction(s, opt.attraction_prior).value;
      mean_[i] = item_mean(s, opt.mean_default).value;
      const double predicted = predicted_variance.empty() ? 0.0 : predicted_variance[i];
      variance_[i] = clipped_variance(item_variance(s), predicted);
    }
    const auto& rs = state.rankings();
    model_click_.resize(rs.size());
    click_.resize(rs.size());
    for (std::size_t r = 0; r < rs.size(); ++r) {
      model_click_[r] = click_probs_by_index(state.ranking_indices(r));
      click_[r] = model_click_[r];
      if (!opt.error_correction) continue;
      const PerRankingStats& prs = state.per_ranking(r);
      for (std::size_t k = 0; k < rs[r].depth(); ++k) {
        const double ctr = model_agnostic_ctr(rs[r], prs, rs[r][k]).value;
        click_[r][k] = blended_click_prob(model_click_[r][k], ctr, prs.n_impr_ranking);
      }
    }
  }

  const ExperimentState& state() const { return *state_; }
  const EstimatorOptions& options() const { return opt_; }

  double attraction(std::size_t idx) const { return attraction_[idx]; }
  double mean(std::size_t idx) const { return mean_[idx]; }
  double variance(std::size_t idx) const { return variance_[idx]; }

  // Click probabilities of input ranking r at its own positions; blended with
  // the ranking's click-through rates when error correction is on.
  const std::vector<double>& ranking_click_probs(std::size_t r) const { return click_[r]; }
  const std::vector<double>& ranking_model_click_probs(std::size_t r) const { return model_click_[r]; }

  double ranking_estimate(std::size_t r) const {
    const auto& idx = state_->ranking_indices(r);
    double s = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) s += click_[r][k] * mean_[idx[k]];
    return s;
  }

  std::vector<double> ranking_estimates() const {
    std::vector<double> out(click_.size());
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = ranking_estimate(r);
    return out;
  }

  // Model click probabilities (expected clicks) for an arbitrary ranking.
  // Items outside the universe get the attraction prior.
  std::vector<double> model_click_probs(const Ranking& o) const {
    std::vector<double> a;
    a.reserve(o.depth());
    for (ItemId id : o) {
      const auto idx = state_->find_index(id);
      a.push_back(idx ? attraction_[*idx] : opt_.attraction_prior);
    }
    return click_probs(a, opt_.click_model);
  }

  std::vector<double> click_probs_by_index(std::span<const std::size_t> idx) const {
    std::vector<double> a(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) a[k] = attraction_[idx[k]];
    return click_probs(a, opt_.click_model);
  }

 private:
  const ExperimentState* state_;
  EstimatorOptions opt_;
  std::vector<double> attraction_, mean_, variance_;
  std::vector<std::vector<double>> model_click_, click_;
};

}  // namespace dirv
