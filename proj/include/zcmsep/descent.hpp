#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "objective.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace zcmsep {

// Raised when the descent iterate stops being finite (step too large for
// the instance); the harness counts such runs as failed trials.
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class InitStrategy {
  // Take the received column whose norm sits at a configured quantile of
  // the column-norm distribution (mid-norm columns of a Manchester
  // mixture are mostly single-tag samples), scaled by scale/||x0||^2 so
  // the matched sample's output modulus starts at `scale` regardless of
  // channel gain, just below the decision threshold. Nothing pushes
  // moduli upward when the ZCM weight is zero, which keeps the
  // lambda = 0 endpoint at chance level, while the aligned start avoids
  // the balanced-mixture stationary points that dominate small lambda.
  Snapshot,
  // i.i.d. complex Gaussian entries scaled to unit Euclidean norm.
  GaussianUnit,
  // Conjugated uniformly-drawn column of X scaled to unit norm.
  MatchedSample,
};

struct InitParams {
  InitStrategy strategy = InitStrategy::Snapshot;
  double snapshot_quantile = 0.55;
  double snapshot_scale = 0.49;
};

inline InitParams parse_init_strategy(const std::string& name) {
  InitParams p;
  if (name == "snapshot") {
    p.strategy = InitStrategy::Snapshot;
  } else if (name == "gaussian-unit") {
    p.strategy = InitStrategy::GaussianUnit;
  } else if (name == "matched-sample") {
    p.strategy = InitStrategy::MatchedSample;
  } else {
    throw std::invalid_argument("unknown init strategy: " + name);
  }
  return p;
}

template <class T = double>
Beamformer<T> init_beamformer(const InitParams& params, const CMat<T>& x, std::mt19937_64& rng) {
  const Index m = x.rows();
  const Index n = x.cols();
  if (m < 1) throw std::invalid_argument("init_beamformer: empty frame");
  switch (params.strategy) {
    case InitStrategy::GaussianUnit: {
      Beamformer<T> w(m);
      for (Index i = 0; i < m; ++i) w[i] = complex_gaussian<T>(rng);
      w /= w.norm();
      return w;
    }
    case InitStrategy::MatchedSample: {
      const auto col = static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
      Beamformer<T> w = x.col(col).conjugate();
      const T nrm = w.norm();
      if (nrm < T(1e-30)) return init_beamformer<T>({InitStrategy::GaussianUnit}, x, rng);
      return w / nrm;
    }
    case InitStrategy::Snapshot: {
      if (!(params.snapshot_quantile >= 0.0 && params.snapshot_quantile <= 1.0))
        throw std::invalid_argument("init_beamformer: snapshot quantile must lie in [0, 1]");
      std::vector<Index> order(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
      RVec<T> norms(n);
      for (Index i = 0; i < n; ++i) norms[i] = x.col(i).norm();
      const auto rank = std::min<Index>(
          static_cast<Index>(params.snapshot_quantile * static_cast<double>(n)), n - 1);
      std::nth_element(order.begin(), order.begin() + rank, order.end(),
                       [&](Index a, Index b) { return norms[a] < norms[b]; });
      const Index col = order[static_cast<std::size_t>(rank)];
      const T nrm2 = norms[col] * norms[col];
      if (nrm2 < T(1e-30)) return init_beamformer<T>({InitStrategy::GaussianUnit}, x, rng);
      return (static_cast<T>(params.snapshot_scale) / nrm2) * x.col(col);
    }
  }
  throw std::invalid_argument("init_beamformer: unknown strategy");
}

template <class T = double>
struct DescentParams {
  T mu = T(1e-2);
  int iterations = 800;
  T lambda = T(0.2);
  GradientVariant variant = GradientVariant::Paper;
  InitParams init;
  // 0 disables the trace; otherwise objectives of w[l] are recorded for
  // l = 0, stride, 2*stride, ... plus the final iterate.
  int trace_stride = 0;

  void validate() const {
    if (!(mu > T(0))) throw std::invalid_argument("descent: mu must be positive");
    if (iterations < 1) throw std::invalid_argument("descent: iteration count must be >= 1");
    if (!(lambda >= T(0) && lambda <= T(1)))
      throw std::invalid_argument("descent: lambda must lie in [0, 1]");
    if (trace_stride < 0) throw std::invalid_argument("descent: trace stride must be >= 0");
  }
};

template <class T = double>
struct DescentResult {
  Beamformer<T> w;
  ObjectiveValue<T> final_objective;
  int iterations = 0;
  std::vector<int> trace_iterations;
  std::vector<ObjectiveValue<T>> trace;
};

// Fixed-step descent of the hybrid objective: exactly `iterations` updates
// w <- w - mu * (lambda * gradJ0 + (1 - lambda) * gradJ1), no line search
// or early stopping. Aborts with NonFiniteError if an iterate degenerates.
template <class T = double>
DescentResult<T> descend(const CMat<T>& x, const Beamformer<T>& w0,
                         const DescentParams<T>& params) {
  params.validate();
  if (w0.size() != x.rows()) throw std::invalid_argument("descend: dimension mismatch");
  const Index n = x.cols();
  if (n < 3) throw std::invalid_argument("descend: need at least 3 samples");

  const T lam = params.lambda;
  const T a0 = lam / static_cast<T>(n);
  const T a1 = (T(1) - lam) / static_cast<T>(n - 2);
  const bool paper = params.variant == GradientVariant::Paper;

  DescentResult<T> result;
  Beamformer<T> w = w0;
  CVec<T> shat(n), q(n);
  RVec<T> u(n);
  Beamformer<T> grad(x.rows());

  auto objectives = [&](T& j0, T& j1) {
    j0 = (u.array() * (u.array() - T(1)).square()).mean();
    j1 = (u.array().head(n - 2) * u.array().segment(1, n - 2) * u.array().tail(n - 2)).sum() /
         static_cast<T>(n - 2);
  };

  for (int l = 0; l < params.iterations; ++l) {
    shat.noalias() = x.transpose() * w.conjugate();
    u = shat.cwiseAbs2();
    for (Index t = 0; t < n; ++t) {
      const T ut = u[t];
      const T f0 = paper ? T(2) * (ut - T(1)) * (T(2) * ut + T(1))
                         : T(2) * (ut - T(1)) * (T(3) * ut - T(1));
      T g = T(0);
      if (t + 2 < n) g += u[t + 1] * u[t + 2];
      if (t >= 1 && t + 1 < n) g += u[t - 1] * u[t + 1];
      if (t >= 2) g += u[t - 2] * u[t - 1];
      q[t] = (a0 * f0 + a1 * T(2) * g) * std::conj(shat[t]);
    }
    grad.noalias() = x * q;

    T j0, j1;
    objectives(j0, j1);
    const T j01 = lam * j0 + (T(1) - lam) * j1;
    if (!std::isfinite(j01) || !grad.allFinite())
      throw NonFiniteError("descend: non-finite objective or gradient at iteration " +
                           std::to_string(l));
    if (params.trace_stride > 0 && l % params.trace_stride == 0) {
      result.trace_iterations.push_back(l);
      result.trace.push_back({j0, j1, j01, lam});
    }

    w -= params.mu * grad;
  }

  shat.noalias() = x.transpose() * w.conjugate();
  u = shat.cwiseAbs2();
  T j0, j1;
  objectives(j0, j1);
  result.final_objective = {j0, j1, lam * j0 + (T(1) - lam) * j1, lam};
  if (params.trace_stride > 0) {
    result.trace_iterations.push_back(params.iterations);
    result.trace.push_back(result.final_objective);
  }
  result.w = std::move(w);
  result.iterations = params.iterations;
  return result;
}

template <class T = double>
struct Recovery {
  Beamformer<T> w;
  CVec<T> shat;
  std::vector<Bit> chips;
  ObjectiveValue<T> objective;
  int start = 0;
};

namespace detail {
template <class T>
std::vector<Bit> threshold_chips(const CVec<T>& shat, T threshold) {
  std::vector<Bit> out(static_cast<std::size_t>(shat.size()));
  for (Index i = 0; i < shat.size(); ++i)
    out[static_cast<std::size_t>(i)] = std::abs(shat[i]) >= threshold ? 1 : 0;
  return out;
}
}  // namespace detail

// Multi-start recovery: up to max_starts independent descents, results
// deduplicated by their decided chip sequences (keeping the lowest final
// objective per sequence), at most d recoveries returned ordered by final
// objective. Start 0 uses the configured initialization unchanged; when
// the snapshot strategy is active, later starts draw their norm quantile
// uniformly from [0.25, 0.85) so the starts differ. Runs that abort on a
// non-finite iterate are skipped.
template <class T = double>
std::vector<Recovery<T>> recover_all(const CMat<T>& x, Index d, const DescentParams<T>& params,
                                     int max_starts, std::mt19937_64& rng,
                                     T threshold = T(0.5)) {
  if (d < 1) throw std::invalid_argument("recover_all: need d >= 1");
  if (max_starts < d) throw std::invalid_argument("recover_all: max_starts must be >= d");
  std::map<std::vector<Bit>, Recovery<T>> by_chips;
  for (int start = 0; start < max_starts; ++start) {
    InitParams init = params.init;
    if (start > 0 && init.strategy == InitStrategy::Snapshot)
      init.snapshot_quantile = uniform_real(rng, 0.25, 0.85);
    const Beamformer<T> w0 = init_beamformer<T>(init, x, rng);
    DescentResult<T> run;
    try {
      run = descend<T>(x, w0, params);
    } catch (const NonFiniteError&) {
      continue;
    }
    Recovery<T> rec;
    rec.shat = apply_beamformer(run.w, x);
    rec.chips = detail::threshold_chips(rec.shat, threshold);
    rec.w = std::move(run.w);
    rec.objective = run.final_objective;
    rec.start = start;
    auto it = by_chips.find(rec.chips);
    if (it == by_chips.end() || rec.objective.j01 < it->second.objective.j01)
      by_chips.insert_or_assign(it == by_chips.end() ? by_chips.end() : it, rec.chips,
                                std::move(rec));
  }
  std::vector<Recovery<T>> out;
  out.reserve(by_chips.size());
  for (auto& [chips, rec] : by_chips) out.push_back(std::move(rec));
  std::sort(out.begin(), out.end(),
            [](const Recovery<T>& a, const Recovery<T>& b) { return a.objective.j01 < b.objective.j01; });
  if (static_cast<Index>(out.size()) > d) out.resize(static_cast<std::size_t>(d));
  return out;
}

}  // namespace zcmsep
