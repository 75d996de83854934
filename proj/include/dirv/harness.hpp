#pragma once

// Experiment orchestration: simulation and replay runs, binary error,
// Chebyshev bound check and CSV output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <thread>
#include <vector>

#include "dirv/config.hpp"
#include "dirv/interleave.hpp"
#include "dirv/replay.hpp"
#include "dirv/sim.hpp"
#include "dirv/text.hpp"

namespace dirv {

// ---------------------------------------------------------------------------
// Binary error

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Fraction of ordered pairs i != j whose preference signs differ. With
// exclude_truth_ties, pairs where the truth is exactly zero are skipped.
inline double binary_error(const PreferenceMatrix& truth, const PreferenceMatrix& est,
                           bool exclude_truth_ties = false) {
  if (truth.size() != est.size()) throw DomainError("preference matrices differ in size");
  if (truth.size() < 2) throw DomainError("binary error needs at least two rankings");
  std::size_t pairs = 0, wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (i == j) continue;
      if (exclude_truth_ties && truth.at(i, j) == 0.0) continue;
      ++pairs;
      if (sign(truth.at(i, j)) != sign(est.at(i, j))) ++wrong;
    }
  }
  return pairs == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// Policy evaluator: accumulated feedback plus the policy that reads it.

class Evaluator {
 public:
  Evaluator(RankingSet rankings, PolicyKind policy, EstimatorOptions estimator,
            std::vector<double> predicted_variance, std::size_t depth)
      : state_(std::move(rankings)),
        policy_(policy),
        estimator_(std::move(estimator)),
        predicted_(std::move(predicted_variance)),
        depth_(depth),
        tally_(state_.rankings().size()) {
    estimator_.error_correction = policy.uses_error_correction();
    if (!policy.uses_variance_prediction()) std::fill(predicted_.begin(), predicted_.end(), 0.0);
    if (predicted_.size() != state_.num_items()) predicted_.resize(state_.num_items(), 0.0);
  }

  struct Choice {
    Ranking ranking;
    std::optional<TdmAssignment> assignment;
  };

  Choice choose(Rng& rng) const {
    switch (policy_.variant) {
      case PolicyKind::Variant::ab:
        return {state_.rankings()[ab_select(state_.rankings().size(), rng)], std::nullopt};
      case PolicyKind::Variant::tdm: {
        auto t = tdm_interleave(state_.rankings(), depth_, rng);
        return {std::move(t.ranking), std::move(t.assignment)};
      }
      default:
        return {dirv_select(snapshot(), depth_, policy_.effective_gamma()), std::nullopt};
    }
  }

  // DIRV over a fixed candidate pool (replay).
  Ranking choose_from(std::span<const Ranking> pool) const {
    return dirv_select_from(pool, snapshot(), policy_.effective_gamma());
  }

  void observe(const ImpressionRecord& rec, const std::optional<TdmAssignment>& assignment = std::nullopt) {
    record_impression(state_, rec);
    update_examination_counts(state_, rec);
    if (assignment) tally_.add(tdm_credit(rec, *assignment, state_.rankings().size()));
    ++impressions_;
  }

  EstimatorSnapshot snapshot() const { return EstimatorSnapshot(state_, estimator_, predicted_); }

  // Per-ranking metric estimates (empty for team-draft, which only ranks).
  std::vector<double> metric_estimates() const {
    if (policy_.variant == PolicyKind::Variant::tdm) return {};
    if (policy_.variant == PolicyKind::Variant::ab) return ab_estimates(state_);
    return snapshot().ranking_estimates();
  }

  PreferenceMatrix estimated_preferences() const {
    if (policy_.variant == PolicyKind::Variant::tdm) return tally_.preferences();
    return PreferenceMatrix::from_metrics(metric_estimates());
  }

  double total_variance() const { return dirv::total_variance(snapshot()); }

  const ExperimentState& state() const { return state_; }
  const PolicyKind& policy() const { return policy_; }
  std::size_t impressions() const { return impressions_; }

 private:
  ExperimentState state_;
  PolicyKind policy_;
  EstimatorOptions estimator_;
  std::vector<double> predicted_;
  std::size_t depth_;
  TdmTally tally_;
  std::size_t impressions_ = 0;
};

// ---------------------------------------------------------------------------
// Simulation

struct SeriesRow {
  std::size_t repeat = 0;
  std::size_t impressions = 0;
  double e_bin = 0.0;
  double total_variance = 0.0;
  std::string policy;
  std::uint64_t seed = 0;

  friend bool operator==(const SeriesRow&, const SeriesRow&) = default;
};

inline std::vector<std::size_t> checkpoints(std::size_t num_impressions, std::size_t interval) {
  std::vector<std::size_t> out;
  for (std::size_t t = interval; t <= num_impressions; t += interval) out.push_back(t);
  if (out.empty() || out.back() != num_impressions) out.push_back(num_impressions);
  return out;
}

struct SimulatedWorld {
  World world;
  RankingSet rankings;
};

// Builds the world and input rankings for a repeat from the world stream.
inline SimulatedWorld build_world(const ExperimentConfig& cfg, Rng& rng) {
  switch (cfg.dataset) {
    case ExperimentConfig::Dataset::ec: {
      World w = gen_ec_world(cfg.num_items, rng);
      RankingSet r = gen_input_rankings(w, cfg.duplication_k, cfg.num_rankings, cfg.depth, rng);
      return {std::move(w), std::move(r)};
    }
    case ExperimentConfig::Dataset::news: {
      World w = load_news_world(cfg.world_file);
      RankingSet r = gen_input_rankings(w, cfg.duplication_k, cfg.num_rankings, cfg.depth, rng);
      return {std::move(w), std::move(r)};
    }
    case ExperimentConfig::Dataset::letor: {
      World w = gen_letor_world(load_relevance(cfg.relevance_file), rng);
      FeatureTable table = sample_items(load_feature_table(cfg.feature_file), cfg.letor_sample_items, rng);
      for (const auto& [id, row] : table.rows) {
        if (!w.count(id)) throw DataError("item " + to_string(id) + " has features but no relevance label");
      }
      RankingSet r = letor_input_rankings(table, cfg.features, cfg.depth);
      return {std::move(w), std::move(r)};
    }
  }
  throw ConfigError("unknown dataset");
}

inline std::vector<double> predict_variances(const VariancePredictor& predictor, const std::vector<ItemId>& universe,
                                             const World* world, Rng& rng) {
  std::vector<double> out;
  out.reserve(universe.size());
  for (ItemId id : universe) {
    std::optional<double> truth;
    if (world) truth = world_item(*world, id).variance();
    out.push_back(predictor.predict(id, truth, rng));
  }
  return out;
}

inline EstimatorOptions estimator_options(const ExperimentConfig& cfg) {
  EstimatorOptions opt;
  opt.click_model = cfg.click_model;
  return opt;
}

// One repeat of a simulated experiment.
// World and input rankings of one repeat; independent of the policy.
inline SimulatedWorld repeat_world(const ExperimentConfig& cfg, std::size_t repeat) {
  Rng world_rng = make_stream(cfg.seed, repeat, Stream::world);
  return build_world(cfg, world_rng);
}

inline std::vector<SeriesRow> run_repeat(const ExperimentConfig& cfg, std::size_t repeat) {
  Rng behavior_rng = make_stream(cfg.seed, repeat, Stream::behavior);
  Rng policy_rng = make_stream(cfg.seed, repeat, Stream::policy);
  Rng predictor_rng = make_stream(cfg.seed, repeat, Stream::predictor);

  SimulatedWorld sw = repeat_world(cfg, repeat);
  const PreferenceMatrix truth = ground_truth_preference(sw.rankings, sw.world, cfg.behavior);
  auto predicted = predict_variances(cfg.make_predictor(), sw.rankings.universe(), &sw.world, predictor_rng);
  const std::size_t depth = std::min(cfg.depth, sw.rankings.universe().size());

  Evaluator eval(sw.rankings, cfg.policy, estimator_options(cfg), std::move(predicted), depth);
  const std::string policy = to_string(cfg.policy.variant);
  std::vector<SeriesRow> rows;
  auto emit = [&] {
    rows.push_back({repeat, eval.impressions(), binary_error(truth, eval.estimated_preferences(), true),
                    eval.total_variance(), policy, cfg.seed});
  };
  for (std::size_t next : checkpoints(cfg.num_impressions, cfg.checkpoint_interval)) {
    while (eval.impressions() < next) {
      auto choice = eval.choose(policy_rng);
      eval.observe(simulate_impression(choice.ranking, sw.world, cfg.behavior, behavior_rng), choice.assignment);
    }
    emit();
  }
  return rows;
}

// Runs `jobs` independent tasks on up to `threads` workers (0 = all cores).
template <typename Fn>
void parallel_for(std::size_t jobs, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::vector<SeriesRow> run_simulation(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<SeriesRow>> per_repeat(cfg.num_repeats);
  parallel_for(cfg.num_repeats, cfg.threads, [&](std::size_t r) { per_repeat[r] = run_repeat(cfg, r); });
  std::vector<SeriesRow> rows;
  for (auto& v : per_repeat) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

// ---------------------------------------------------------------------------
// Replay

struct ReplayResult {
  std::vector<SeriesRow> rows;
  std::size_t loaded_records = 0;
  std::size_t consumed_records = 0;
  std::size_t truncated_runs = 0;  // (repeat, query) runs that ran out of records
};

namespace detail {

struct ReplaySplit {
  std::vector<double> truth_metrics;
  std::map<Ranking, std::vector<ImpressionRecord>> remaining;
  std::map<ItemId, std::vector<double>> truth_samples;  // post-click values per item
};

inline ReplaySplit split_replay_query(const ReplayQuery& q, bool swap_halves) {
  ReplaySplit s;
  std::map<Ranking, std::pair<double, std::size_t>> truth_totals;
  for (const auto& [r, records] : q.pool) {
    const std::size_t half = (records.size() + 1) / 2;  // the odd record goes to the truth half
    auto mid = records.begin() + static_cast<std::ptrdiff_t>(half);
    std::vector<ImpressionRecord> first(records.begin(), mid), second(mid, records.end());
    if (swap_halves) std::swap(first, second);
    auto& t = truth_totals[r];
    for (const auto& rec : first) {
      t.first += rec.total_post_click();
      ++t.second;
      for (std::size_t k = 0; k < rec.clicks.size(); ++k) {
        if (rec.clicks[k]) s.truth_samples[rec.ranking[k]].push_back(*rec.post_clicks[k]);
      }
    }
    if (!second.empty()) s.remaining.emplace(r, std::move(second));
  }
  for (const auto& r : q.input_rankings) {
    auto it = truth_totals.find(r);
    if (it == truth_totals.end() || it->second.second == 0) {
      throw DataError("query " + q.query_id + ": input ranking " + to_string(r) +
                      " has no logged impressions for the ground-truth half");
    }
    s.truth_metrics.push_back(it->second.first / static_cast<double>(it->second.second));
  }
  return s;
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace detail

// Replays one query: returns one (e_bin, total_variance) pair per checkpoint.
using ConsumeHook = std::function<void(const ImpressionRecord&)>;

inline std::vector<std::pair<double, double>> replay_query(const ExperimentConfig& cfg, const ReplayQuery& q,
                                                           std::size_t repeat, ReplayResult& stats,
                                                           const ConsumeHook& on_consume = {}) {
  auto split = detail::split_replay_query(q, cfg.replay_swap_halves);
  const RankingSet rankings(q.input_rankings);
  const PreferenceMatrix truth = PreferenceMatrix::from_metrics(split.truth_metrics);

  // Variance oracle in replay: sample variance of the ground-truth half.
  World proxy;
  for (ItemId id : rankings.universe()) {
    auto it = split.truth_samples.find(id);
    const double var = it == split.truth_samples.end() ? 0.0 : detail::sample_variance(it->second);
    proxy.emplace(id, GroundTruthItem{id, 0.0, GammaDwell{1.0, var}});
  }
  Rng predictor_rng = make_stream(cfg.seed, repeat, Stream::predictor);
  Rng policy_rng = make_stream(cfg.seed, repeat, Stream::policy);
  auto predicted = predict_variances(cfg.make_predictor(), rankings.universe(), &proxy, predictor_rng);
  const std::size_t depth = rankings[0].depth();
  Evaluator eval(rankings, cfg.policy, estimator_options(cfg), std::move(predicted), depth);

  std::map<Ranking, std::size_t> cursor;
  auto available = [&](const Ranking& r) {
    auto it = split.remaining.find(r);
    return it != split.remaining.end() && cursor[r] < it->second.size();
  };

  std::vector<std::pair<double, double>> out;
  bool exhausted = false;
  for (std::size_t next : checkpoints(cfg.num_impressions, cfg.checkpoint_interval)) {
    while (!exhausted && eval.impressions() < next) {
      std::optional<Ranking> pick;
      if (cfg.policy.variant == PolicyKind::Variant::ab) {
        const auto& inputs = rankings.rankings();
        const Ranking& first = inputs[ab_select(inputs.size(), policy_rng)];
        if (available(first)) {
          pick = first;
        } else {
          std::vector<Ranking> open;
          for (const auto& r : inputs) {
            if (available(r)) open.push_back(r);
          }
          if (!open.empty()) pick = open[ab_select(open.size(), policy_rng)];
        }
      } else {
        std::vector<Ranking> pool;
        for (const auto& [r, records] : split.remaining) {
          if (cursor[r] < records.size()) pool.push_back(r);
        }
        if (!pool.empty()) pick = eval.choose_from(pool);
      }
      if (!pick) {
        exhausted = true;
        ++stats.truncated_runs;
        break;
      }
      const ImpressionRecord& rec = split.remaining.at(*pick)[cursor[*pick]++];
      if (on_consume) on_consume(rec);
      eval.observe(rec);
      ++stats.consumed_records;
    }
    out.emplace_back(binary_error(truth, eval.estimated_preferences(), true), eval.total_variance());
  }
  return out;
}

// Per repeat, every query is replayed and checkpoint values are averaged over
// queries.
inline ReplayResult run_replay(const ExperimentConfig& cfg, const ReplayDataset& data) {
  cfg.validate();
  if (data.queries.empty()) throw DataError("replay dataset has no queries");
  ReplayResult result;
  const auto marks = checkpoints(cfg.num_impressions, cfg.checkpoint_interval);
  for (std::size_t repeat = 0; repeat < cfg.num_repeats; ++repeat) {
    std::vector<double> e_bin(marks.size(), 0.0), var(marks.size(), 0.0);
    for (const auto& q : data.queries) {
      result.loaded_records += q.total_records();
      auto series = replay_query(cfg, q, repeat, result);
      for (std::size_t i = 0; i < marks.size(); ++i) {
        e_bin[i] += series[i].first;
        var[i] += series[i].second;
      }
    }
    const double nq = static_cast<double>(data.queries.size());
    for (std::size_t i = 0; i < marks.size(); ++i) {
      result.rows.push_back(
          {repeat, marks[i], e_bin[i] / nq, var[i] / nq, to_string(cfg.policy.variant), cfg.seed});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Chebyshev bound on the expected binary error

struct BoundCheckReport {
  enum class Verdict { holds, violated, vacuous };

  double empirical_error = 0.0;      // Monte Carlo mean of E_bin
  double bound = 0.0;                // sum of plug-in ranking variances / (C |R|)
  double monte_carlo_bound = 0.0;    // same with the across-repeat variance of the estimates
  double min_gap_squared = 0.0;      // C
  std::size_t repeats = 0;
  Verdict verdict = Verdict::holds;
};

inline std::string to_string(BoundCheckReport::Verdict v) {
  switch (v) {
    case BoundCheckReport::Verdict::holds: return "holds";
    case BoundCheckReport::Verdict::violated: return "violated";
    case BoundCheckReport::Verdict::vacuous: return "vacuous";
  }
  return "?";
}

struct BoundCheckSetup {
  World world;
  RankingSet rankings;
  UserBehaviorKind behavior = UserBehaviorKind::cascade();
  PolicyKind policy{PolicyKind::Variant::ab, 1.0};
  EstimatorOptions estimator;
  std::vector<double> predicted_variance;  // aligned with the universe
  std::size_t depth = 0;                   // 0 = depth of the first ranking
  std::size_t impressions = 1000;
  std::size_t repeats = 200;
  std::uint64_t seed = 1;
};

inline BoundCheckReport variance_bound_check(const BoundCheckSetup& s) {
  const auto truth_metrics = true_ranking_metrics(s.rankings, s.world, s.behavior);
  const PreferenceMatrix truth = PreferenceMatrix::from_metrics(truth_metrics);
  const std::size_t n = truth_metrics.size();
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = truth_metrics[i] - truth_metrics[j];
      c = std::min(c, d * d);
    }
  }
  if (!(c > 0.0)) throw DomainError("two rankings have equal true metrics; the bound is undefined");

  const std::size_t depth = s.depth ? s.depth : s.rankings[0].depth();
  BoundCheckReport rep;
  rep.min_gap_squared = c;
  rep.repeats = s.repeats;
  std::vector<double> sum_est(n, 0.0), sum_est2(n, 0.0);
  double sum_err = 0.0, sum_var = 0.0;
  for (std::size_t rep_i = 0; rep_i < s.repeats; ++rep_i) {
    Rng behavior_rng = make_stream(s.seed, rep_i, Stream::behavior);
    Rng policy_rng = make_stream(s.seed, rep_i, Stream::policy);
    Evaluator eval(s.rankings, s.policy, s.estimator, s.predicted_variance, depth);
    while (eval.impressions() < s.impressions) {
      auto choice = eval.choose(policy_rng);
      eval.observe(simulate_impression(choice.ranking, s.world, s.behavior, behavior_rng), choice.assignment);
    }
    // The bound is stated for the decomposed estimator, whatever the
    // presentation policy.
    const auto est = eval.snapshot().ranking_estimates();
    sum_err += binary_error(truth, PreferenceMatrix::from_metrics(est));
    sum_var += eval.total_variance();
    for (std::size_t i = 0; i < n; ++i) {
      sum_est[i] += est[i];
      sum_est2[i] += est[i] * est[i];
    }
  }
  const double reps = static_cast<double>(s.repeats);
  rep.empirical_error = sum_err / reps;
  rep.bound = (sum_var / reps) / (c * static_cast<double>(n));
  double mc_var = 0.0;
  for (std::size_t i = 0; i < n && s.repeats > 1; ++i) {
    const double mean = sum_est[i] / reps;
    mc_var += std::max(0.0, (sum_est2[i] - reps * mean * mean) / (reps - 1.0));
  }
  rep.monte_carlo_bound = mc_var / (c * static_cast<double>(n));
  if (rep.bound > 1.0) rep.verdict = BoundCheckReport::Verdict::vacuous;
  else if (rep.empirical_error <= rep.bound) rep.verdict = BoundCheckReport::Verdict::holds;
  else rep.verdict = BoundCheckReport::Verdict::violated;
  return rep;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr const char* kSeriesHeader = "repeat,impressions,e_bin,total_variance,policy,seed";
inline constexpr const char* kAggregateHeader =
    "policy,impressions,repeats,e_bin_mean,e_bin_std,total_variance_mean,total_variance_std";

struct AggregateRow {
  std::string policy;
  std::size_t impressions = 0;
  std::size_t repeats = 0;
  double e_bin_mean = 0.0, e_bin_std = 0.0;
  double total_variance_mean = 0.0, total_variance_std = 0.0;
};

// Mean and sample standard deviation per (policy, checkpoint).
inline std::vector<AggregateRow> aggregate(const std::vector<SeriesRow>& rows) {
  struct Acc {
    std::size_t n = 0;
    double e = 0, e2 = 0, v = 0, v2 = 0;
  };
  std::map<std::pair<std::string, std::size_t>, Acc> acc;
  for (const auto& r : rows) {
    auto& a = acc[{r.policy, r.impressions}];
    ++a.n;
    a.e += r.e_bin;
    a.e2 += r.e_bin * r.e_bin;
    a.v += r.total_variance;
    a.v2 += r.total_variance * r.total_variance;
  }
  auto stddev = [](double s, double s2, std::size_t n) {
    if (n < 2) return 0.0;
    const double m = s / static_cast<double>(n);
    return std::sqrt(std::max(0.0, (s2 - static_cast<double>(n) * m * m) / static_cast<double>(n - 1)));
  };
  std::vector<AggregateRow> out;
  for (const auto& [key, a] : acc) {
    const double n = static_cast<double>(a.n);
    out.push_back({key.first, key.second, a.n, a.e / n, stddev(a.e, a.e2, a.n), a.v / n, stddev(a.v, a.v2, a.n)});
  }
  return out;
}

inline void write_series_csv(std::ostream& out, const std::vector<SeriesRow>& rows) {
  out << kSeriesHeader << '\n';
  for (const auto& r : rows) {
    out << r.repeat << ',' << r.impressions << ',' << text::format_double(r.e_bin) << ','
        << text::format_double(r.total_variance) << ',' << r.policy << ',' << r.seed << '\n';
  }
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateHeader << '\n';
  for (const auto& a : rows) {
    out << a.policy << ',' << a.impressions << ',' << a.repeats << ',' << text::format_double(a.e_bin_mean) << ','
        << text::format_double(a.e_bin_std) << ',' << text::format_double(a.total_variance_mean) << ','
        << text::format_double(a.total_variance_std) << '\n';
  }
}

namespace detail {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  writer(out);
  out.flush();
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace detail

struct EmittedFiles {
  std::filesystem::path series;
  std::filesystem::path aggregate;
};

// Writes <dir>/<stem>.csv (every row) and <dir>/<stem>_aggregate.csv.
inline EmittedFiles emit_results(const std::vector<SeriesRow>& rows, const std::filesystem::path& dir,
                                 const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
  EmittedFiles files{dir / (stem + ".csv"), dir / (stem + "_aggregate.csv")};
  detail::write_file(files.series, [&](std::ostream& o) { write_series_csv(o, rows); });
  detail::write_file(files.aggregate, [&](std::ostream& o) { write_aggregate_csv(o, aggregate(rows)); });
  return files;
}

inline std::vector<SeriesRow> read_series_csv(const std::filesystem::path& path) {
  auto lines = text::read_lines(path.string());
  if (lines.empty() || lines[0].second != kSeriesHeader) {
    throw DataError(path.string() + ": not a result series file");
  }
  std::vector<SeriesRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = text::split(lines[i].second, ',');
    const std::string where = path.string() + ":" + std::to_string(lines[i].first);
    if (f.size() != 6) throw DataError(where + ": expected 6 fields");
    auto rep = text::to_int(f[0]), imp = text::to_int(f[1]), seed = text::to_int(f[5]);
    auto e = text::to_double(f[2]), v = text::to_double(f[3]);
    if (!rep || !imp || !seed || !e || !v) throw DataError(where + ": malformed field");
    rows.push_back({static_cast<std::size_t>(*rep), static_cast<std::size_t>(*imp), *e, *v, f[4],
                    static_cast<std::uint64_t>(*seed)});
  }
  return rows;
}

// Aggregates every series CSV in `dir` (files with the series header).
inline std::vector<AggregateRow> report(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    auto lines = text::read_lines(entry.path().string());
    if (!lines.empty() && lines[0].second == kSeriesHeader) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SeriesRow> rows;
  for (const auto& f : files) {
    auto r = read_series_csv(f);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return aggregate(rows);
}

}  // namespace dirv
