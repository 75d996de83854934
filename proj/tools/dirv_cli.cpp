// Command-line front end: simulate, replay, report, plus helpers for
// synthesizing replay logs and checking the binary-error bound.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "dirv/dirv.hpp"

namespace {

using namespace dirv;

void print_final(const std::vector<SeriesRow>& rows) {
  const auto agg = aggregate(rows);
  if (agg.empty()) return;
  const auto& last = agg.back();
  std::printf("%s: %zu repeats, %zu impressions, mean E_bin %.4f (sd %.4f), total variance %.4g\n",
              last.policy.c_str(), last.repeats, last.impressions, last.e_bin_mean, last.e_bin_std,
              last.total_variance_mean);
}

struct Overrides {
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> impressions;
  std::optional<std::size_t> threads;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--policy", policy, "dirv | dirv_no_varpred | dirv_no_errcorr | tdm | ab");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--repeats", repeats, "number of repeats");
    cmd->add_option("--impressions", impressions, "impressions per repeat");
    cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
  }

  void apply(ExperimentConfig& cfg) const {
    if (!policy.empty()) cfg.policy.variant = parse_policy(policy);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output = out;
    if (repeats) cfg.num_repeats = *repeats;
    if (impressions) cfg.num_impressions = *impressions;
    if (threads) cfg.threads = *threads;
  }
};

int run_simulate(const std::string& config, const Overrides& ov) {
  ExperimentConfig cfg = load_config(config);
  cfg.mode = ExperimentConfig::Mode::simulate;
  ov.apply(cfg);
  const auto rows = run_simulation(cfg);
  const auto files = emit_results(rows, cfg.output, to_string(cfg.policy.variant));
  print_final(rows);
  std::printf("wrote %s and %s\n", files.series.c_str(), files.aggregate.c_str());
  return 0;
}

int run_replay_cmd(const std::string& config, const std::string& data_path, const Overrides& ov) {
  ExperimentConfig cfg = load_config(config);
  cfg.mode = ExperimentConfig::Mode::replay;
  ov.apply(cfg);
  const ReplayDataset data = load_replay(data_path);
  const auto result = run_replay(cfg, data);
  if (result.truncated_runs > 0) {
    std::fprintf(stderr, "warning: %zu query runs ran out of logged records before %zu impressions\n",
                 result.truncated_runs, cfg.num_impressions);
  }
  const auto files = emit_results(result.rows, cfg.output, to_string(cfg.policy.variant) + "_replay");
  print_final(result.rows);
  std::printf("consumed %zu of %zu loaded records\n", result.consumed_records, result.loaded_records);
  std::printf("wrote %s and %s\n", files.series.c_str(), files.aggregate.c_str());
  return 0;
}

int run_report(const std::string& dir) {
  const auto rows = report(dir);
  const auto out = std::filesystem::path(dir) / "report.csv";
  detail::write_file(out, [&](std::ostream& o) { write_aggregate_csv(o, rows); });
  std::map<std::string, const AggregateRow*> last;
  for (const auto& r : rows) last[r.policy] = &r;
  std::printf("%-18s %12s %8s %10s %10s %14s\n", "policy", "impressions", "repeats", "e_bin", "sd", "total_var");
  for (const auto& [policy, r] : last) {
    std::printf("%-18s %12zu %8zu %10.4f %10.4f %14.6g\n", policy.c_str(), r->impressions, r->repeats, r->e_bin_mean,
                r->e_bin_std, r->total_variance_mean);
  }
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

// Logs every arrangement of each query's input-ranking items, one simulated
// world per query.
int run_synth(const std::string& config, std::size_t queries, std::size_t records, const std::string& out) {
  ExperimentConfig cfg = load_config(config);
  cfg.mode = ExperimentConfig::Mode::simulate;
  cfg.validate();
  ReplayDataset data;
  for (std::size_t q = 0; q < queries; ++q) {
    Rng world_rng = make_stream(cfg.seed, q, Stream::world);
    Rng log_rng = make_stream(cfg.seed, q, Stream::replay);
    SimulatedWorld sw = build_world(cfg, world_rng);
    data.queries.push_back(
        synthesize_replay_query("q" + std::to_string(q + 1), sw.rankings, sw.world, cfg.behavior, records, log_rng));
  }
  detail::write_file(out, [&](std::ostream& o) { write_replay(o, data); });
  std::printf("wrote %zu records for %zu queries to %s\n", data.total_records(), queries, out.c_str());
  return 0;
}

int run_bound(const std::string& config, const Overrides& ov) {
  ExperimentConfig cfg = load_config(config);
  cfg.mode = ExperimentConfig::Mode::simulate;
  ov.apply(cfg);
  cfg.validate();
  Rng world_rng = make_stream(cfg.seed, 0, Stream::world);
  Rng predictor_rng = make_stream(cfg.seed, 0, Stream::predictor);
  SimulatedWorld sw = build_world(cfg, world_rng);
  BoundCheckSetup setup{sw.world, sw.rankings};
  setup.behavior = cfg.behavior;
  setup.policy = cfg.policy;
  setup.estimator = estimator_options(cfg);
  setup.predicted_variance = predict_variances(cfg.make_predictor(), sw.rankings.universe(), &sw.world, predictor_rng);
  setup.depth = std::min(cfg.depth, sw.rankings.universe().size());
  setup.impressions = cfg.num_impressions;
  setup.repeats = cfg.num_repeats;
  setup.seed = cfg.seed;
  const auto rep = variance_bound_check(setup);
  std::printf("empirical E[E_bin] %.6g\nbound %.6g\nmonte carlo bound %.6g\nC %.6g\nrepeats %zu\nverdict %s\n",
              rep.empirical_error, rep.bound, rep.monte_carlo_bound, rep.min_gap_squared, rep.repeats,
              to_string(rep.verdict).c_str());
  return rep.verdict == BoundCheckReport::Verdict::violated ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-click metric interleaving experiments"};
  app.require_subcommand(1);

  std::string config, data, in_dir, out_file;
  Overrides ov;
  std::size_t queries = 30, records = 200;

  auto* sim = app.add_subcommand("simulate", "run a simulated experiment");
  sim->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  ov.add_to(sim);

  auto* rep = app.add_subcommand("replay", "replay a logged-impression dataset");
  rep->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  rep->add_option("--data", data, "replay dataset")->required()->check(CLI::ExistingFile);
  ov.add_to(rep);

  auto* rpt = app.add_subcommand("report", "aggregate result CSVs in a directory");
  rpt->add_option("--in", in_dir, "results directory")->required()->check(CLI::ExistingDirectory);

  auto* syn = app.add_subcommand("synth-replay", "write a simulated replay dataset");
  syn->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  syn->add_option("--queries", queries, "number of queries")->check(CLI::PositiveNumber);
  syn->add_option("--records", records, "records per arrangement")->check(CLI::PositiveNumber);
  syn->add_option("--out", out_file, "output file")->required();

  auto* bnd = app.add_subcommand("bound-check", "compare mean E_bin with its variance bound");
  bnd->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  ov.add_to(bnd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(config, ov);
    if (*rep) return run_replay_cmd(config, data, ov);
    if (*rpt) return run_report(in_dir);
    if (*syn) return run_synth(config, queries, records, out_file);
    if (*bnd) return run_bound(config, ov);
  } catch (const dirv::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dirv::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
