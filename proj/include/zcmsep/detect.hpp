#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "airlink.hpp"
#include "descent.hpp"
#include "objective.hpp"
#include "tagsig.hpp"
#include "types.hpp"

namespace zcmsep {

// Magnitude threshold decision; invariant to the global phase ambiguity
// of the beamformed stream. Threshold 0.5 splits the two ZCM moduli.
template <class T = double>
std::vector<Bit> hard_decide(const CVec<T>& shat, T threshold = T(0.5)) {
  if (!(threshold > T(0) && threshold < T(1)))
    throw std::invalid_argument("hard_decide: threshold must lie in (0, 1)");
  return detail::threshold_chips(shat, threshold);
}

// Exact-match identification: the decided chips must equal some tag's
// chip sequence at every position. Frames never carry duplicate tag
// messages (synthesis redraws collisions), so at most one tag matches.
template <class T = double>
std::optional<Index> match_tag(const std::vector<Bit>& decided,
                               const std::vector<TagSignal<T>>& signals) {
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (static_cast<Index>(decided.size()) != signals[i].chips.size())
      throw std::invalid_argument("match_tag: length mismatch");
    if (decided == signals[i].chips.chips) return static_cast<Index>(i);
  }
  return std::nullopt;
}

// Verdict of one Monte Carlo trial: the headline run is a single descent
// from a single initialization; trials driven through multi-start
// recovery additionally record which tags were identified.
struct TrialOutcome {
  std::optional<Index> matched;
  std::vector<Bit> decided;
  ObjectiveValue<double> objective;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int iterations = 0;
  bool failed = false;              // descent aborted on a non-finite iterate
  std::vector<bool> tags_found;     // per-tag identification from recover_all, if run
};

struct SuccessStats {
  Index trials = 0;
  Index matches = 0;
  double rate = 0.0;
  double ci_halfwidth = 0.0;        // 1.96 * sqrt(p(1-p)/n)
  std::vector<Index> per_tag;       // identification count per tag index
  Index failed = 0;
  Index multistart_trials = 0;      // trials carrying recover_all verdicts
  double all_tags_rate = 0.0;       // among those, fraction identifying every tag
};

inline SuccessStats success_rate(const std::vector<TrialOutcome>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("success_rate: no outcomes");
  SuccessStats s;
  s.trials = static_cast<Index>(outcomes.size());
  Index all_tags = 0;
  for (const auto& o : outcomes) {
    if (o.failed) ++s.failed;
    if (o.matched) {
      ++s.matches;
      const auto idx = static_cast<std::size_t>(*o.matched);
      if (s.per_tag.size() <= idx) s.per_tag.resize(idx + 1, 0);
      ++s.per_tag[idx];
    }
    if (!o.tags_found.empty()) {
      ++s.multistart_trials;
      bool all = true;
      for (bool f : o.tags_found) all = all && f;
      if (all) ++all_tags;
    }
  }
  const double n = static_cast<double>(s.trials);
  s.rate = static_cast<double>(s.matches) / n;
  s.ci_halfwidth = 1.96 * std::sqrt(s.rate * (1.0 - s.rate) / n);
  if (s.multistart_trials > 0)
    s.all_tags_rate = static_cast<double>(all_tags) / static_cast<double>(s.multistart_trials);
  return s;
}

}  // namespace zcmsep
