#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "helpers.hpp"
#include "zcmsep/descent.hpp"
#include "zcmsep/spuria.hpp"

using namespace zcmsep;
using testing::Complex;

namespace {

Complex phasor(double angle) { return std::polar(1.0, angle); }
const double third = 2.0 * std::numbers::pi / 3.0;

std::string window_string(const std::array<Bit, 4>& w) {
  std::string s;
  for (auto b : w) s += static_cast<char>('0' + b);
  return s;
}

}  // namespace

TEST_CASE("two-tag spurious mixes reproduce the printed outcome table") {
  const auto rows = pair_outcome_table();
  REQUIRE(rows.size() == 4);

  // rows ordered (0,0), (1,0), (0,1), (1,1)
  CHECK(std::abs(rows[0].out_minus) <= 1e-12);
  CHECK(std::abs(rows[0].out_plus) <= 1e-12);

  CHECK(std::abs(rows[1].out_minus - Complex(1, 0)) <= 1e-12);
  CHECK(std::abs(rows[1].out_plus - Complex(1, 0)) <= 1e-12);

  CHECK(std::abs(rows[2].out_minus - phasor(third)) <= 1e-12);
  CHECK(std::abs(rows[2].out_plus - phasor(-third)) <= 1e-12);

  CHECK(std::abs(rows[3].out_minus - phasor(std::numbers::pi / 3)) <= 1e-12);
  CHECK(std::abs(rows[3].out_plus - phasor(-std::numbers::pi / 3)) <= 1e-12);

  for (const auto& r : rows) {
    const bool zcm_minus = std::abs(r.mod_minus) <= 1e-12 || std::abs(r.mod_minus - 1) <= 1e-12;
    const bool zcm_plus = std::abs(r.mod_plus) <= 1e-12 || std::abs(r.mod_plus - 1) <= 1e-12;
    CHECK(zcm_minus);
    CHECK(zcm_plus);
  }
}

TEST_CASE("spurious_pair rejects mismatched lengths") {
  CVec<double> a = CVec<double>::Zero(2), b = CVec<double>::Zero(3);
  CHECK_THROWS_AS(spurious_pair<double>(a, b, 0, 0, MixSign::Plus), std::invalid_argument);
}

TEST_CASE("three-tag spurious mixes keep the ZCM property on every combination") {
  auto rng = make_engine(1234);
  const auto channel = draw_channel<double>(3, 3, rng);
  // bit patterns whose chips cover all eight (b1,b2,b3) combinations
  const std::array<std::array<Bit, 4>, 3> bits = {{{1, 1, 0, 0}, {1, 0, 1, 0}, {1, 0, 0, 1}}};
  std::vector<TagSignal<double>> signals(3);
  std::array<double, 3> phis{};
  for (std::size_t i = 0; i < 3; ++i) {
    BitSequence seq;
    seq.bits.assign(bits[i].begin(), bits[i].end());
    const auto chips = manchester_encode(seq);
    phis[i] = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
    signals[i].chips = chips;
    signals[i].draw = {PhaseModel::Kind::Constant, phis[i], {}, 0.0};
    signals[i].symbols.setZero(chips.size());
    for (Index n = 0; n < chips.size(); ++n)
      if (chips.chips[static_cast<std::size_t>(n)]) signals[i].symbols[n] = phasor(phis[i]);
  }
  const auto frame = synthesize_frame<double>(channel, signals, {0.0, 0.0}, rng);
  const auto zf = zero_forcing_beamformers(frame.channel);

  for (const MixSign sign : {MixSign::Plus, MixSign::Minus}) {
    const auto w = spurious_triplet<double>(zf.col(0), zf.col(1), zf.col(2), phis[0], phis[1],
                                            phis[2], sign);
    const auto report = verify_zcm_on_mix<double>(w, frame);
    CHECK(report.violations == 0);
    CHECK(report.max_deviation <= 1e-9);

    const auto out = apply_beamformer(w, frame.x);
    const double s = sign == MixSign::Plus ? 1.0 : -1.0;
    for (Index n = 0; n < out.size(); ++n) {
      const double b1 = frame.signals[0].chips.chips[static_cast<std::size_t>(n)];
      const double b2 = frame.signals[1].chips.chips[static_cast<std::size_t>(n)];
      const double b3 = frame.signals[2].chips.chips[static_cast<std::size_t>(n)];
      const Complex expect = b1 + phasor(-s * third) * b2 + phasor(s * third) * b3;
      CHECK(std::abs(out[n] - expect) <= 1e-12);
    }
  }

  // spot values: all-active cancels, (1,1,0) lands on a unit phasor
  const auto w_plus = spurious_triplet<double>(zf.col(0), zf.col(1), zf.col(2), phis[0], phis[1],
                                               phis[2], MixSign::Plus);
  const auto out = apply_beamformer(w_plus, frame.x);
  CHECK(std::abs(out[0]) <= 1e-12);                                     // chips (1,1,1)
  CHECK(std::abs(out[7] - phasor(-std::numbers::pi / 3)) <= 1e-12);     // chips (1,1,0)
}

TEST_CASE("verify_zcm_on_mix flags arbitrary beamformers") {
  auto rng = make_engine(77);
  const auto frame = testing::noiseless_frame(2, 2, 100, PhaseModel::constant(), rng);
  int flagged = 0;
  for (int i = 0; i < 20; ++i) {
    const auto w = testing::random_vector(2, rng);
    if (verify_zcm_on_mix<double>(w, frame).violations > 0) ++flagged;
  }
  CHECK(flagged >= 19);
}

TEST_CASE("pair mixes on noiseless frames have no ZCM violations") {
  auto rng = make_engine(88);
  const auto frame = testing::noiseless_frame(2, 2, 100, PhaseModel::constant(), rng);
  const auto zf = zero_forcing_beamformers(frame.channel);
  const double psi1 = frame.signals[0].draw.phase;
  const double psi2 = frame.signals[1].draw.phase;
  for (const MixSign sign : {MixSign::Plus, MixSign::Minus}) {
    const auto w = spurious_pair<double>(zf.col(0), zf.col(1), psi1, psi2, sign);
    const auto report = verify_zcm_on_mix<double>(w, frame);
    CHECK(report.violations == 0);
  }
}

TEST_CASE("windowed-product table reproduces all printed rows") {
  const auto rows = pi_window_table();
  REQUIRE(rows.size() == 16);

  struct Expected {
    std::array<Complex, 4> shat;
    Complex pi1, pi2;
  };
  const Complex e3 = phasor(third);              // e^{j 2pi/3}
  const Complex e6 = phasor(std::numbers::pi / 3);  // e^{j pi/3}
  const Complex one(1, 0), zero(0, 0);
  std::map<std::pair<std::string, std::string>, Expected> printed = {
      {{"0101", "0110"}, {{zero, e6, e3, one}, zero, std::conj(e6)}},
      {{"0101", "1010"}, {{e3, one, e3, one}, std::conj(e3), std::conj(e3)}},
      {{"1001", "0110"}, {{one, e3, e3, one}, one, one}},
      {{"0110", "0101"}, {{zero, e6, one, e3}, zero, Complex(-1, 0)}},
      {{"0110", "1001"}, {{e3, one, one, e3}, e3, e3}},
      {{"0110", "1010"}, {{e3, one, e6, zero}, Complex(-1, 0), zero}},
      {{"1010", "0101"}, {{one, e3, one, e3}, std::conj(e3), std::conj(e3)}},
      {{"1010", "0110"}, {{one, e3, e6, zero}, std::conj(e6), zero}},
  };

  int printed_found = 0, null_rows = 0;
  for (const auto& row : rows) {
    const auto key = std::make_pair(window_string(row.b1), window_string(row.b2));
    const auto it = printed.find(key);
    if (it != printed.end()) {
      ++printed_found;
      for (std::size_t k = 0; k < 4; ++k)
        CHECK(std::abs(row.shat[k] - it->second.shat[k]) <= 1e-12);
      CHECK(std::abs(row.pi_first - it->second.pi1) <= 1e-12);
      CHECK(std::abs(row.pi_second - it->second.pi2) <= 1e-12);
    } else {
      ++null_rows;
      CHECK(std::abs(row.pi_first) <= 1e-12);
      CHECK(std::abs(row.pi_second) <= 1e-12);
    }
  }
  CHECK(printed_found == 8);
  CHECK(null_rows == 8);
}

TEST_CASE("spurious mixes leave a nonzero product penalty on long frames") {
  auto rng = make_engine(4096);
  int positive = 0;
  const int frames = 50;
  for (int i = 0; i < frames; ++i) {
    const auto frame = testing::noiseless_frame(2, 2, 100, PhaseModel::constant(), rng);
    const auto zf = zero_forcing_beamformers(frame.channel);
    const auto w = spurious_pair<double>(zf.col(0), zf.col(1), frame.signals[0].draw.phase,
                                         frame.signals[1].draw.phase, MixSign::Minus);
    if (eval_j1(w, frame.x) > 1e-6) ++positive;
  }
  CHECK(positive >= 48);
}
