#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "airlink.hpp"
#include "objective.hpp"
#include "types.hpp"

namespace zcmsep {

enum class MixSign { Plus, Minus };

// Test-side oracle: beamformers computed from the known channel that
// exactly invert a noiseless mixture, w_i = i-th column of A (A^H A)^{-1}
// so that w_i^H A = e_i^T. The blind algorithm never sees these.
template <class T = double>
CMat<T> zero_forcing_beamformers(const ChannelMatrix<T>& channel) {
  const CMat<T> gram = channel.a.adjoint() * channel.a;
  return channel.a * gram.llt().solve(CMat<T>::Identity(channel.tags(), channel.tags()));
}

namespace detail {
template <class T>
std::complex<T> unit_phasor(double angle) {
  return {static_cast<T>(std::cos(angle)), static_cast<T>(std::sin(angle))};
}
}  // namespace detail

// Two-tag ambiguity construction: with compensation phases psi_i matching
// the tags' beamformed outputs, the combination
//   e^{j psi_1} w_1 + e^{j(s*2pi/3 + psi_2)} w_2     (s = +1 or -1)
// yields outcomes b_1[n] + e^{-s*j*2pi/3} b_2[n], whose moduli stay in
// {0, 1}: a spurious ZCM solution. Note the sign flip between the phase
// used in the construction and the one appearing in the outcome.
template <class T = double>
Beamformer<T> spurious_pair(const Beamformer<T>& w1, const Beamformer<T>& w2, double psi1,
                            double psi2, MixSign sign) {
  if (w1.size() != w2.size()) throw std::invalid_argument("spurious_pair: length mismatch");
  const double third = 2.0 * std::numbers::pi / 3.0;
  const double s = sign == MixSign::Plus ? 1.0 : -1.0;
  return detail::unit_phasor<T>(psi1) * w1 + detail::unit_phasor<T>(s * third + psi2) * w2;
}

// Three-tag variant: adds e^{j(-s*2pi/3 + psi_3)} w_3; outcomes become
// b_1[n] + e^{-s*j*2pi/3} b_2[n] + e^{+s*j*2pi/3} b_3[n], again ZCM for
// every chip combination (the three phasors are the cube roots of unity).
template <class T = double>
Beamformer<T> spurious_triplet(const Beamformer<T>& w1, const Beamformer<T>& w2,
                               const Beamformer<T>& w3, double psi1, double psi2, double psi3,
                               MixSign sign) {
  if (w1.size() != w2.size() || w1.size() != w3.size())
    throw std::invalid_argument("spurious_triplet: length mismatch");
  const double third = 2.0 * std::numbers::pi / 3.0;
  const double s = sign == MixSign::Plus ? 1.0 : -1.0;
  return detail::unit_phasor<T>(psi1) * w1 + detail::unit_phasor<T>(s * third + psi2) * w2 +
         detail::unit_phasor<T>(-s * third + psi3) * w3;
}

template <class T = double>
struct ZcmReport {
  T max_deviation = T(0);  // max over n of | |s[n]| * (|s[n]| - 1) |
  Index violations = 0;    // samples whose deviation exceeds the tolerance
};

template <class T = double>
ZcmReport<T> verify_zcm_on_mix(const Beamformer<T>& w, const ReceivedFrame<T>& frame,
                               T tolerance = T(1e-9)) {
  const CVec<T> shat = apply_beamformer(w, frame.x);
  ZcmReport<T> report;
  for (Index n = 0; n < shat.size(); ++n) {
    const T a = std::abs(shat[n]);
    const T dev = std::abs(a * (a - T(1)));
    if (dev > report.max_deviation) report.max_deviation = dev;
    if (dev > tolerance) ++report.violations;
  }
  return report;
}

// One row of the two-tag outcome table: what each spurious mix produces
// for a given chip combination, and the moduli showing ZCM holds.
struct PairOutcomeRow {
  Bit b1 = 0, b2 = 0;
  std::complex<double> out_minus;
  double mod_minus = 0.0;
  std::complex<double> out_plus;
  double mod_plus = 0.0;
};

// Builds the two-tag outcome table through the full mechanism: a noiseless
// two-tag frame whose four chip positions realize all (b1, b2)
// combinations, exact zero-forcing beamformers, and both spurious mixes.
inline std::vector<PairOutcomeRow> pair_outcome_table(std::uint64_t seed = 0x7ab1e1ull) {
  auto rng = make_engine(seed);
  const auto channel = draw_channel<double>(2, 2, rng);
  // tag 1 bits (1,0) -> chips 1,0,0,1; tag 2 bits (1,1) -> chips 1,0,1,0:
  // positions carry (1,1), (0,0), (0,1), (1,0)
  ChipSequence chips1{{1, 0, 0, 1}};
  ChipSequence chips2{{1, 0, 1, 0}};
  const double phi1 = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
  const double phi2 = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
  std::vector<TagSignal<double>> signals(2);
  signals[0].chips = chips1;
  signals[1].chips = chips2;
  signals[0].draw = {PhaseModel::Kind::Constant, phi1, {}, 0.0};
  signals[1].draw = {PhaseModel::Kind::Constant, phi2, {}, 0.0};
  signals[0].symbols.setZero(4);
  signals[1].symbols.setZero(4);
  for (Index n = 0; n < 4; ++n) {
    if (chips1.chips[static_cast<std::size_t>(n)])
      signals[0].symbols[n] = detail::unit_phasor<double>(phi1);
    if (chips2.chips[static_cast<std::size_t>(n)])
      signals[1].symbols[n] = detail::unit_phasor<double>(phi2);
  }
  auto frame = synthesize_frame<double>(channel, signals, {0.0, 0.0}, rng, {seed, 0});

  const CMat<double> zf = zero_forcing_beamformers(frame.channel);
  // exact zero-forcing leaves the constant tag phase as the only rotation,
  // so the compensation phases are the drawn phis
  const Beamformer<double> w_minus =
      spurious_pair<double>(zf.col(0), zf.col(1), phi1, phi2, MixSign::Minus);
  const Beamformer<double> w_plus =
      spurious_pair<double>(zf.col(0), zf.col(1), phi1, phi2, MixSign::Plus);
  const CVec<double> out_minus = apply_beamformer(w_minus, frame.x);
  const CVec<double> out_plus = apply_beamformer(w_plus, frame.x);

  std::vector<PairOutcomeRow> rows(4);
  const std::array<Index, 4> order = {1, 3, 2, 0};  // (0,0), (1,0), (0,1), (1,1)
  for (std::size_t r = 0; r < 4; ++r) {
    const Index n = order[r];
    rows[r].b1 = chips1.chips[static_cast<std::size_t>(n)];
    rows[r].b2 = chips2.chips[static_cast<std::size_t>(n)];
    rows[r].out_minus = out_minus[n];
    rows[r].mod_minus = std::abs(out_minus[n]);
    rows[r].out_plus = out_plus[n];
    rows[r].mod_plus = std::abs(out_plus[n]);
  }
  return rows;
}

// One row of the windowed-product table: a four-chip window of each tag
// (two coded bits), the mixed outcomes, and the two products computable
// inside the window.
struct PiWindowRow {
  std::array<Bit, 4> b1{};
  std::array<Bit, 4> b2{};
  std::array<std::complex<double>, 4> shat{};
  std::complex<double> pi_first;   // shat[0] shat*[1] shat[2]
  std::complex<double> pi_second;  // shat[1] shat*[2] shat[3]
};

// Enumerates, through the full mechanism, all 16 combinations of two-bit
// windows of two tags under the spurious mix whose outcomes carry the
// e^{+j*2pi/3} phase (the Minus-labelled construction): a noiseless
// two-tag frame of 32 bits laying out every combination, exact
// zero-forcing, one spurious beamformer. Eight combinations yield at
// least one nonzero product; the other eight yield none.
inline std::vector<PiWindowRow> pi_window_table(std::uint64_t seed = 0x7ab1e2ull) {
  auto rng = make_engine(seed);
  const auto channel = draw_channel<double>(2, 2, rng);

  BitSequence bits1, bits2;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      bits1.bits.push_back(static_cast<Bit>((p >> 1) & 1));
      bits1.bits.push_back(static_cast<Bit>(p & 1));
      bits2.bits.push_back(static_cast<Bit>((q >> 1) & 1));
      bits2.bits.push_back(static_cast<Bit>(q & 1));
    }
  const ChipSequence chips1 = manchester_encode(bits1);
  const ChipSequence chips2 = manchester_encode(bits2);
  const double phi1 = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
  const double phi2 = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
  std::vector<TagSignal<double>> signals(2);
  signals[0].chips = chips1;
  signals[1].chips = chips2;
  signals[0].draw = {PhaseModel::Kind::Constant, phi1, {}, 0.0};
  signals[1].draw = {PhaseModel::Kind::Constant, phi2, {}, 0.0};
  const Index n_chips = chips1.size();
  signals[0].symbols.setZero(n_chips);
  signals[1].symbols.setZero(n_chips);
  for (Index n = 0; n < n_chips; ++n) {
    if (chips1.chips[static_cast<std::size_t>(n)])
      signals[0].symbols[n] = detail::unit_phasor<double>(phi1);
    if (chips2.chips[static_cast<std::size_t>(n)])
      signals[1].symbols[n] = detail::unit_phasor<double>(phi2);
  }
  auto frame = synthesize_frame<double>(channel, signals, {0.0, 0.0}, rng, {seed, 0});

  const CMat<double> zf = zero_forcing_beamformers(frame.channel);
  const Beamformer<double> w_mix =
      spurious_pair<double>(zf.col(0), zf.col(1), phi1, phi2, MixSign::Minus);
  const CVec<double> out = apply_beamformer(w_mix, frame.x);

  std::vector<PiWindowRow> rows(16);
  for (std::size_t c = 0; c < 16; ++c) {
    PiWindowRow& row = rows[c];
    for (Index k = 0; k < 4; ++k) {
      const auto pos = static_cast<std::size_t>(4 * static_cast<Index>(c) + k);
      row.b1[static_cast<std::size_t>(k)] = chips1.chips[pos];
      row.b2[static_cast<std::size_t>(k)] = chips2.chips[pos];
      row.shat[static_cast<std::size_t>(k)] = out[static_cast<Index>(pos)];
    }
    row.pi_first = row.shat[0] * std::conj(row.shat[1]) * row.shat[2];
    row.pi_second = row.shat[1] * std::conj(row.shat[2]) * row.shat[3];
  }
  return rows;
}

}  // namespace zcmsep
