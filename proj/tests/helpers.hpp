#pragma once

// Test-side builders and independent re-implementations of the objective
// formulas. The transcriptions below are deliberately plain loops kept
// separate from the library so they can serve as oracles for it.

#include <complex>
#include <vector>

#include "zcmsep/airlink.hpp"
#include "zcmsep/rng.hpp"
#include "zcmsep/spuria.hpp"
#include "zcmsep/tagsig.hpp"
#include "zcmsep/types.hpp"

namespace testing {

using zcmsep::CMat;
using zcmsep::CVec;
using zcmsep::Index;
using Complex = std::complex<double>;

inline CMat<double> random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  CMat<double> x(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) x(i, j) = zcmsep::complex_gaussian(rng);
  return x;
}

inline CVec<double> random_vector(Index n, std::mt19937_64& rng) {
  CVec<double> w(n);
  for (Index i = 0; i < n; ++i) w[i] = zcmsep::complex_gaussian(rng);
  return w;
}

// Noiseless multi-tag frame with the requested phase model.
inline zcmsep::ReceivedFrame<double> noiseless_frame(Index antennas, Index tags, Index chips,
                                                     const zcmsep::PhaseModel& model,
                                                     std::mt19937_64& rng) {
  const auto channel = zcmsep::draw_channel<double>(antennas, tags, rng);
  std::vector<zcmsep::TagSignal<double>> signals;
  for (Index i = 0; i < tags; ++i) {
    const auto bits = zcmsep::generate_message(chips / 2, rng);
    signals.push_back(zcmsep::modulate<double>(zcmsep::manchester_encode(bits), model, rng));
  }
  return zcmsep::synthesize_frame<double>(channel, std::move(signals), {0.0, 0.0}, rng);
}

// --- independent transcriptions -----------------------------------------

inline Complex shat_at(const CVec<double>& w, const CMat<double>& x, Index n) {
  Complex acc = 0.0;
  for (Index m = 0; m < x.rows(); ++m) acc += std::conj(w[m]) * x(m, n);
  return acc;
}

inline double j0_direct(const CVec<double>& w, const CMat<double>& x) {
  double acc = 0.0;
  for (Index n = 0; n < x.cols(); ++n) {
    const double a2 = std::norm(shat_at(w, x, n));
    acc += a2 * (a2 - 1.0) * (a2 - 1.0);
  }
  return acc / static_cast<double>(x.cols());
}

inline double j1_direct(const CVec<double>& w, const CMat<double>& x) {
  const Index n = x.cols();
  double acc = 0.0;
  for (Index k = 1; k + 1 < n; ++k)
    acc += std::norm(shat_at(w, x, k - 1)) * std::norm(shat_at(w, x, k)) *
           std::norm(shat_at(w, x, k + 1));
  return acc / static_cast<double>(n - 2);
}

// (1/N) sum c[n]^* x[n] with c[n] = 2(|s|^2-1)(2|s|^2+1) s, s = w^H x[n].
inline CVec<double> grad_j0_direct(const CVec<double>& w, const CMat<double>& x) {
  CVec<double> g = CVec<double>::Zero(x.rows());
  for (Index n = 0; n < x.cols(); ++n) {
    const Complex s = shat_at(w, x, n);
    const double u = std::norm(s);
    const Complex c = 2.0 * (u - 1.0) * (2.0 * u + 1.0) * s;
    for (Index m = 0; m < x.rows(); ++m) g[m] += std::conj(c) * x(m, n);
  }
  return g / static_cast<double>(x.cols());
}

// (1/(N-2)) sum over interior windows of the three window coefficients.
inline CVec<double> grad_j1_direct(const CVec<double>& w, const CMat<double>& x) {
  const Index n = x.cols();
  CVec<double> g = CVec<double>::Zero(x.rows());
  for (Index k = 1; k + 1 < n; ++k) {
    const Complex sm = shat_at(w, x, k - 1);
    const Complex s0 = shat_at(w, x, k);
    const Complex sp = shat_at(w, x, k + 1);
    const Complex cm = 2.0 * std::norm(s0) * std::norm(sp) * sm;
    const Complex c0 = 2.0 * std::norm(sm) * std::norm(sp) * s0;
    const Complex cp = 2.0 * std::norm(sm) * std::norm(s0) * sp;
    for (Index m = 0; m < x.rows(); ++m)
      g[m] += std::conj(cm) * x(m, k - 1) + std::conj(c0) * x(m, k) + std::conj(cp) * x(m, k + 1);
  }
  return g / static_cast<double>(n - 2);
}

}  // namespace testing
