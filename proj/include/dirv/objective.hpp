#pragma once

// Variance of the decomposed ranking estimate and the interleaving objectives
// built from it.
//
// For item d at its position in input ranking r, with click probability p,
// mean post-click value m, post-click variance V, n_i impressions and n_c
// clicks, the variance contribution of p * m is
//
//   phi = p(1-p)/n_i * V/n_c  +  p^2 * V/n_c  +  m^2 * p(1-p)/n_i
//
// (variance of a product of independent sample means, with the click
// probability treated as Bernoulli).

#include <algorithm>
#include <vector>

#include "dirv/estimator.hpp"

namespace dirv {

struct PhiInputs {
  double p_click = 0.0;
  double mean_x = 0.0;
  double var_x = 0.0;
  double n_impr = 0.0;
  double n_click = 0.0;  // expected-click updates make this fractional
};

// Counts below this are raised to it inside phi.
inline constexpr double kCountFloor = 1.0;
// Stand-in for phi of an item with no impressions or no clicks yet.
inline constexpr double kPhiCap = 1e12;

inline double phi(const PhiInputs& in) {
  const double p = in.p_click;
  const double bern = p * (1.0 - p);
  const double n_i = std::max(in.n_impr, kCountFloor);
  const double n_c = std::max(in.n_click, kCountFloor);
  const double var_mean = in.var_x / n_c;
  const double var_click = bern / n_i;
  return var_click * var_mean + p * p * var_mean + in.mean_x * in.mean_x * var_click;
}

namespace detail {

inline bool is_cold(const ItemStats& s) { return s.n_impr == 0 || s.n_click == 0; }

inline PhiInputs phi_inputs(const EstimatorSnapshot& snap, std::size_t r, std::size_t k,
                            double extra_impr = 0.0, double extra_click = 0.0) {
  const std::size_t idx = snap.state().ranking_indices(r)[k];
  const ItemStats& s = snap.state().item_at(idx);
  return {snap.ranking_click_probs(r)[k], snap.mean(idx), snap.variance(idx),
          static_cast<double>(s.n_impr) + extra_impr, static_cast<double>(s.n_click) + extra_click};
}

}  // namespace detail

// Variance of input ranking r's estimate at the current tallies.
inline double ranking_variance(std::size_t r, const EstimatorSnapshot& snap) {
  double v = 0.0;
  const std::size_t depth = snap.state().ranking_indices(r).size();
  for (std::size_t k = 0; k < depth; ++k) v += phi(detail::phi_inputs(snap, r, k));
  return v;
}

inline double total_variance(const EstimatorSnapshot& snap) {
  double v = 0.0;
  for (std::size_t r = 0; r < snap.state().rankings().size(); ++r) v += ranking_variance(r, snap);
  return v;
}

// Total variance over R expected after presenting `o` once: items in o gain
// one impression and their expected clicks under o. Cold items left out of o
// count as kPhiCap, the same convention greedy_gain uses, so that
// greedy_gain(d) == f(prefix) - f(prefix + d).
inline double f_objective(const Ranking& o, const EstimatorSnapshot& snap) {
  if (o.empty()) throw DomainError("f objective needs a nonempty ranking");
  const ExperimentState& state = snap.state();
  std::vector<double> extra_impr(state.num_items(), 0.0), extra_click(state.num_items(), 0.0);
  const std::vector<double> expected = snap.model_click_probs(o);
  for (std::size_t k = 0; k < o.depth(); ++k) {
    const auto idx = state.find_index(o[k]);
    if (!idx) continue;
    extra_impr[*idx] = 1.0;
    extra_click[*idx] = expected[k];
  }
  double f = 0.0;
  for (std::size_t r = 0; r < state.rankings().size(); ++r) {
    const auto& idx = state.ranking_indices(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (extra_impr[idx[k]] == 0.0 && detail::is_cold(state.item_at(idx[k]))) {
        f += kPhiCap;
        continue;
      }
      f += phi(detail::phi_inputs(snap, r, k, extra_impr[idx[k]], extra_click[idx[k]]));
    }
  }
  return f;
}

// Variance reduction from appending item `idx` (universe index) at a position
// whose examination probability is `exam`. Items with no impressions or no
// clicks count as kPhiCap before the update.
inline double greedy_gain_at(std::size_t idx, double exam, const EstimatorSnapshot& snap) {
  const ExperimentState& state = snap.state();
  const ItemStats& s = state.item_at(idx);
  const double expected_click = exam * snap.attraction(idx);
  const bool unseen = detail::is_cold(s);
  double gain = 0.0;
  for (std::size_t r = 0; r < state.rankings().size(); ++r) {
    const auto& ridx = state.ranking_indices(r);
    for (std::size_t k = 0; k < ridx.size(); ++k) {
      if (ridx[k] != idx) continue;
      const double before = unseen ? kPhiCap : phi(detail::phi_inputs(snap, r, k));
      const double after = phi(detail::phi_inputs(snap, r, k, 1.0, expected_click));
      gain += before - after;
    }
  }
  return gain;
}

// Examination probability of the slot directly below `prefix`.
inline double examination_after(const Ranking& prefix, const EstimatorSnapshot& snap) {
  const ClickModelKind& kind = snap.options().click_model;
  double exam = first_examination(kind);
  for (std::size_t k = 0; k < prefix.depth(); ++k) {
    const auto idx = snap.state().find_index(prefix[k]);
    const double a = idx ? snap.attraction(*idx) : snap.options().attraction_prior;
    exam = next_examination(exam, a, k + 1, kind);
  }
  return exam;
}

inline double greedy_gain(ItemId d, const Ranking& prefix, const EstimatorSnapshot& snap) {
  if (prefix.contains(d)) throw DomainError("candidate item is already in the prefix");
  const auto idx = snap.state().find_index(d);
  if (!idx) return 0.0;
  return greedy_gain_at(*idx, examination_after(prefix, snap), snap);
}

// Per-ranking variance weighted by each ranking's click-model weight. Only the
// input ranking identical to `o` receives the presentation update.
inline double g_objective(const Ranking& o, const EstimatorSnapshot& snap) {
  if (o.empty()) throw DomainError("g objective needs a nonempty ranking");
  const ExperimentState& state = snap.state();
  const auto& rs = state.rankings();
  double g = 0.0;
  for (std::size_t r = 0; r < rs.size(); ++r) {
    const PerRankingStats& prs = state.per_ranking(r);
    const bool match = rs[r] == o;
    const auto& idx = state.ranking_indices(r);
    const auto& model = snap.ranking_model_click_probs(r);
    double inner = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double n_i = static_cast<double>(prs.n_impr_ranking) + (match ? 1.0 : 0.0);
      const double n_c = static_cast<double>(prs.clicks_on(rs[r][k])) + (match ? model[k] : 0.0);
      inner += phi({snap.ranking_click_probs(r)[k], snap.mean(idx[k]), snap.variance(idx[k]), n_i, n_c});
    }
    g += blend_weight(prs.n_impr_ranking) * inner;
  }
  return g;
}

}  // namespace dirv
