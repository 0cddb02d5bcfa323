#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "airlink.hpp"
#include "descent.hpp"
#include "detect.hpp"
#include "objective.hpp"
#include "rng.hpp"
#include "tagsig.hpp"

namespace zcmsep {

inline std::string phase_model_name(const PhaseModel& model) {
  switch (model.kind) {
    case PhaseModel::Kind::Constant: return "constant";
    case PhaseModel::Kind::RandomPerSymbol: return "random";
    case PhaseModel::Kind::FrequencyDeviation: {
      char buf[32];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, model.freq_dev);
      return "freqdev:" + std::string(buf, p);
    }
  }
  return "constant";
}

inline PhaseModel parse_phase_model(const std::string& name) {
  if (name == "constant") return PhaseModel::constant();
  if (name == "random") return PhaseModel::random_per_symbol();
  if (name.rfind("freqdev:", 0) == 0) {
    const std::string arg = name.substr(8);
    try {
      std::size_t used = 0;
      const double df = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return PhaseModel::frequency_deviation(df);
    } catch (const std::exception&) {
      throw std::invalid_argument("phase-model: bad freqdev value '" + arg + "'");
    }
  }
  throw std::invalid_argument("phase-model: unknown model '" + name + "'");
}

inline GradientVariant parse_gradient_variant(const std::string& name) {
  if (name == "paper") return GradientVariant::Paper;
  if (name == "analytic") return GradientVariant::Analytic;
  throw std::invalid_argument("grad: unknown variant '" + name + "'");
}

// Grid syntax: either a comma list ("0,0.2,1") or "start:stop:step"
// inclusive of both ends ("0:1:0.05" gives 21 points).
inline std::vector<double> parse_lambda_grid(const std::string& text) {
  std::vector<double> grid;
  const auto parse_one = [](const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("lambda: bad number '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
      throw std::invalid_argument("lambda: expected start:stop:step");
    const double start = parse_one(a), stop = parse_one(b), step = parse_one(c);
    if (!(step > 0)) throw std::invalid_argument("lambda: step must be positive");
    const auto count = static_cast<Index>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (Index i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) grid.push_back(parse_one(item));
    }
  }
  if (grid.empty()) throw std::invalid_argument("lambda: empty grid");
  return grid;
}

struct ScenarioConfig {
  Index tags = 2;
  Index antennas = 2;
  Index chips = 100;
  double snr_db = 20.0;
  double mu = 1e-2;
  std::vector<int> iters = {800};
  std::vector<double> lambdas = {0.2};
  PhaseModel model = PhaseModel::constant();
  Index trials = 500;
  std::uint64_t seed = 1;
  GradientVariant variant = GradientVariant::Paper;
  InitParams init;
  double threshold = 0.5;
  int starts = 1;     // > 1 additionally runs multi-start recovery per trial
  int threads = 1;
  bool timings = false;  // keep the seconds column at 0 so output bytes are reproducible
  std::string out;

  void validate() const {
    if (tags < 1) throw std::invalid_argument("tags: must be >= 1");
    if (antennas < tags) throw std::invalid_argument("antennas: must be >= tags");
    if (chips < 4 || chips % 2 != 0) throw std::invalid_argument("chips: must be even and >= 4");
    if (!(mu > 0)) throw std::invalid_argument("mu: must be positive");
    if (iters.empty()) throw std::invalid_argument("iters: empty grid");
    for (int l : iters)
      if (l < 1) throw std::invalid_argument("iters: iteration counts must be >= 1");
    if (lambdas.empty()) throw std::invalid_argument("lambda: empty grid");
    for (double l : lambdas)
      if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("lambda: values must lie in [0, 1]");
    if (trials < 1) throw std::invalid_argument("trials: must be >= 1");
    if (!(threshold > 0.0 && threshold < 1.0))
      throw std::invalid_argument("threshold: must lie in (0, 1)");
    if (starts < 1) throw std::invalid_argument("starts: must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads: must be >= 1");
    if (!std::isfinite(snr_db)) throw std::invalid_argument("snr-db: must be finite");
  }
};

// Frame of one Monte Carlo trial. The seed is derived from (master seed,
// trial index) only, so a given trial index reuses identical messages,
// channel, noise and starts across every (lambda, L) grid point: curve
// points are paired comparisons. Draw order per trial: channel, then all
// messages (redrawn together in the astronomically unlikely event two
// tags encode identical chips), then per-tag phase draws, then noise.
template <class T = double>
ReceivedFrame<T> make_trial_frame(const ScenarioConfig& config, Index trial) {
  const std::uint64_t trial_seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
  auto rng = make_engine(trial_seed);
  const auto channel = draw_channel<T>(config.antennas, config.tags, rng);
  std::vector<ChipSequence> chips(static_cast<std::size_t>(config.tags));
  for (;;) {
    for (auto& c : chips) c = manchester_encode(generate_message(config.chips / 2, rng));
    bool distinct = true;
    for (std::size_t i = 0; i < chips.size() && distinct; ++i)
      for (std::size_t j = i + 1; j < chips.size(); ++j)
        if (chips[i] == chips[j]) {
          distinct = false;
          break;
        }
    if (distinct) break;
  }
  std::vector<TagSignal<T>> signals;
  signals.reserve(chips.size());
  for (const auto& c : chips) signals.push_back(modulate<T>(c, config.model, rng));
  return synthesize_frame<T>(channel, std::move(signals), noise_from_snr(config.snr_db), rng,
                             {config.seed, trial_seed});
}

// Start k of a trial draws from its own derived engine, so the first
// start is identical whether or not multi-start recovery is enabled.
inline std::uint64_t start_seed(std::uint64_t master, Index trial, int start) {
  const std::uint64_t trial_seed = derive_seed(master, static_cast<std::uint64_t>(trial));
  return derive_seed(trial_seed, 1000ull + static_cast<std::uint64_t>(start));
}

template <class T = double>
TrialOutcome run_trial(const ScenarioConfig& config, double lambda, int iterations, Index trial) {
  const ReceivedFrame<T> frame = make_trial_frame<T>(config, trial);
  DescentParams<T> params;
  params.mu = static_cast<T>(config.mu);
  params.iterations = iterations;
  params.lambda = static_cast<T>(lambda);
  params.variant = config.variant;
  params.init = config.init;

  TrialOutcome outcome;
  outcome.seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
  outcome.lambda = lambda;
  outcome.iterations = iterations;

  auto rng0 = make_engine(start_seed(config.seed, trial, 0));
  try {
    const auto w0 = init_beamformer<T>(params.init, frame.x, rng0);
    const auto run = descend<T>(frame.x, w0, params);
    const CVec<T> shat = apply_beamformer(run.w, frame.x);
    outcome.decided = hard_decide<T>(shat, static_cast<T>(config.threshold));
    outcome.matched = match_tag<T>(outcome.decided, frame.signals);
    outcome.objective = {static_cast<double>(run.final_objective.j0),
                         static_cast<double>(run.final_objective.j1),
                         static_cast<double>(run.final_objective.j01), lambda};
  } catch (const NonFiniteError&) {
    outcome.failed = true;
  }

  if (config.starts > 1) {
    auto rng_multi = make_engine(start_seed(config.seed, trial, 0));
    const auto recoveries = recover_all<T>(frame.x, config.tags, params, config.starts, rng_multi,
                                           static_cast<T>(config.threshold));
    outcome.tags_found.assign(static_cast<std::size_t>(config.tags), false);
    for (const auto& rec : recoveries) {
      const auto idx = match_tag<T>(rec.chips, frame.signals);
      if (idx) outcome.tags_found[static_cast<std::size_t>(*idx)] = true;
    }
  }
  return outcome;
}

struct SweepRow {
  double lambda = 0.0;
  int iterations = 0;
  Index tags = 0;
  Index antennas = 0;
  std::string model;
  Index trials = 0;
  double success_rate = 0.0;
  double ci_halfwidth = 0.0;
  double mean_j0 = 0.0;
  double mean_j1 = 0.0;
  double mean_j01 = 0.0;
  Index failed = 0;
  double seconds = 0.0;
  SuccessStats stats;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

namespace detail {

inline SweepRow aggregate_row(const ScenarioConfig& config, double lambda, int iterations,
                              const std::vector<TrialOutcome>& outcomes, double seconds) {
  SweepRow row;
  row.lambda = lambda;
  row.iterations = iterations;
  row.tags = config.tags;
  row.antennas = config.antennas;
  row.model = phase_model_name(config.model);
  row.trials = static_cast<Index>(outcomes.size());
  row.stats = success_rate(outcomes);
  row.success_rate = row.stats.rate;
  row.ci_halfwidth = row.stats.ci_halfwidth;
  row.failed = row.stats.failed;
  Index ok = 0;
  for (const auto& o : outcomes) {
    if (o.failed) continue;
    row.mean_j0 += o.objective.j0;
    row.mean_j1 += o.objective.j1;
    row.mean_j01 += o.objective.j01;
    ++ok;
  }
  if (ok > 0) {
    row.mean_j0 /= static_cast<double>(ok);
    row.mean_j1 /= static_cast<double>(ok);
    row.mean_j01 /= static_cast<double>(ok);
  }
  row.seconds = seconds;
  return row;
}

template <class Work>
void parallel_for_jobs(std::size_t jobs, int threads, Work&& work) {
  if (threads <= 1 || jobs <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) work(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto runner = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      work(j);
    }
  };
  std::vector<std::thread> pool;
  const auto n = static_cast<std::size_t>(threads);
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(runner);
  for (auto& t : pool) t.join();
}

}  // namespace detail

// Runs trials for every (L, lambda) grid point. Trials write into
// preallocated slots indexed by (point, trial), so results are identical
// for any worker count; rows are aggregated in grid order afterwards.
// With timings enabled, points run one after another (still parallel
// inside) so per-row wall time means something; output bytes then vary
// run to run, which is why timings default to off.
template <class T = double>
SweepResult run_sweep(const ScenarioConfig& config) {
  config.validate();
  struct Point {
    int iterations;
    double lambda;
  };
  std::vector<Point> points;
  for (int l : config.iters)
    for (double lam : config.lambdas) points.push_back({l, lam});

  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<std::vector<TrialOutcome>> outcomes(points.size(),
                                                  std::vector<TrialOutcome>(trials));
  SweepResult result;
  if (config.timings) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      const auto t0 = std::chrono::steady_clock::now();
      detail::parallel_for_jobs(trials, config.threads, [&](std::size_t t) {
        outcomes[p][t] =
            run_trial<T>(config, points[p].lambda, points[p].iterations, static_cast<Index>(t));
      });
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      result.rows.push_back(detail::aggregate_row(config, points[p].lambda, points[p].iterations,
                                                  outcomes[p], dt.count()));
    }
    return result;
  }
  detail::parallel_for_jobs(points.size() * trials, config.threads, [&](std::size_t j) {
    const std::size_t p = j / trials;
    const std::size_t t = j % trials;
    outcomes[p][t] =
        run_trial<T>(config, points[p].lambda, points[p].iterations, static_cast<Index>(t));
  });
  for (std::size_t p = 0; p < points.size(); ++p)
    result.rows.push_back(
        detail::aggregate_row(config, points[p].lambda, points[p].iterations, outcomes[p], 0.0));
  return result;
}

namespace detail {
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}
}  // namespace detail

// Shortest round-trip decimal formatting: a parse of the emitted file
// recovers every value bit-exactly, independent of locale.
inline std::string to_csv(const SweepResult& result) {
  std::string out =
      "lambda,L,d,M,model,trials,success_rate,ci_halfwidth,mean_j0,mean_j1,mean_j01,"
      "failed_trials,seconds\n";
  for (const auto& r : result.rows) {
    out += detail::format_double(r.lambda);
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += std::to_string(r.tags);
    out += ',';
    out += std::to_string(r.antennas);
    out += ',';
    out += r.model;
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += detail::format_double(r.success_rate);
    out += ',';
    out += detail::format_double(r.ci_halfwidth);
    out += ',';
    out += detail::format_double(r.mean_j0);
    out += ',';
    out += detail::format_double(r.mean_j1);
    out += ',';
    out += detail::format_double(r.mean_j01);
    out += ',';
    out += std::to_string(r.failed);
    out += ',';
    out += detail::format_double(r.seconds);
    out += '\n';
  }
  return out;
}

inline void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("emit_csv: cannot open " + path);
  os << to_csv(result);
  if (!os) throw std::runtime_error("emit_csv: write failed for " + path);
}

}  // namespace zcmsep
