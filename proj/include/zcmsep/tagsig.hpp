#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace zcmsep {

using Bit = std::uint8_t;

// Logical message bits, half as many as the coded chips.
struct BitSequence {
  std::vector<Bit> bits;

  Index size() const { return static_cast<Index>(bits.size()); }
};

// Manchester chip stream: bit 1 -> chip pair (1,0), bit 0 -> (0,1).
// Every valid sequence has an even length, exactly half its chips set,
// and no three consecutive ones (each pair contains a zero).
struct ChipSequence {
  std::vector<Bit> chips;

  Index size() const { return static_cast<Index>(chips.size()); }
  bool operator==(const ChipSequence& other) const { return chips == other.chips; }
};

inline bool is_valid_chip_sequence(const std::vector<Bit>& chips) {
  if (chips.size() % 2 != 0) return false;
  for (std::size_t k = 0; k + 1 < chips.size(); k += 2) {
    const bool one_zero = chips[k] == 1 && chips[k + 1] == 0;
    const bool zero_one = chips[k] == 0 && chips[k + 1] == 1;
    if (!one_zero && !zero_one) return false;
  }
  return true;
}

// Per-tag carrier-phase imperfection model.
struct PhaseModel {
  enum class Kind { Constant, RandomPerSymbol, FrequencyDeviation };

  Kind kind = Kind::Constant;
  // Frequency-deviation draw is uniform over [-freq_dev/2, +freq_dev/2]
  // cycles per symbol.
  double freq_dev = 0.0;

  static PhaseModel constant() { return {Kind::Constant, 0.0}; }
  static PhaseModel random_per_symbol() { return {Kind::RandomPerSymbol, 0.0}; }
  static PhaseModel frequency_deviation(double freq_dev) {
    if (!(freq_dev >= 0.0)) throw std::invalid_argument("frequency deviation must be >= 0");
    return {Kind::FrequencyDeviation, freq_dev};
  }
};

// Record of the phase randomness actually drawn for one tag in one frame,
// kept so experiments can be replayed.
struct PhaseDraw {
  PhaseModel::Kind kind = PhaseModel::Kind::Constant;
  double phase = 0.0;                // Constant: the per-frame phi
  std::vector<double> phases;        // RandomPerSymbol: phi[n] per symbol
  double freq_offset = 0.0;          // FrequencyDeviation: the drawn delta F
};

// Complex symbol stream of one tag: s[n] = b[n] * exp(j*phase[n]), so
// |s[n]| is exactly b[n] (zero or unit modulus everywhere).
template <class T = double>
struct TagSignal {
  CVec<T> symbols;
  ChipSequence chips;
  PhaseDraw draw;

  Index size() const { return symbols.size(); }
};

inline BitSequence generate_message(Index num_bits, std::mt19937_64& rng) {
  if (num_bits < 1) throw std::invalid_argument("generate_message: num_bits must be >= 1");
  BitSequence out;
  out.bits.resize(static_cast<std::size_t>(num_bits));
  for (auto& b : out.bits) b = static_cast<Bit>(rng() & 1u);
  return out;
}

inline ChipSequence manchester_encode(const BitSequence& bits) {
  ChipSequence out;
  out.chips.resize(bits.bits.size() * 2);
  for (std::size_t k = 0; k < bits.bits.size(); ++k) {
    out.chips[2 * k] = bits.bits[k] ? 1 : 0;
    out.chips[2 * k + 1] = bits.bits[k] ? 0 : 1;
  }
  return out;
}

// Decode outcome: either the recovered bits, or the indices of the chip
// pairs that have no Manchester preimage ((0,0) or (1,1)).
struct ManchesterDecode {
  BitSequence bits;
  std::vector<Index> invalid_pairs;

  bool ok() const { return invalid_pairs.empty(); }
};

inline ManchesterDecode manchester_decode(const std::vector<Bit>& chips) {
  if (chips.size() % 2 != 0)
    throw std::invalid_argument("manchester_decode: chip count must be even");
  ManchesterDecode out;
  out.bits.bits.reserve(chips.size() / 2);
  for (std::size_t k = 0; 2 * k + 1 < chips.size(); ++k) {
    const Bit a = chips[2 * k], b = chips[2 * k + 1];
    if (a == 1 && b == 0) {
      out.bits.bits.push_back(1);
    } else if (a == 0 && b == 1) {
      out.bits.bits.push_back(0);
    } else {
      out.invalid_pairs.push_back(static_cast<Index>(k));
    }
  }
  if (!out.ok()) out.bits.bits.clear();
  return out;
}

template <class T = double>
TagSignal<T> modulate(const ChipSequence& chips, const PhaseModel& model, std::mt19937_64& rng) {
  const Index n = chips.size();
  TagSignal<T> sig;
  sig.chips = chips;
  sig.symbols.setZero(n);
  sig.draw.kind = model.kind;
  switch (model.kind) {
    case PhaseModel::Kind::Constant: {
      const double phi = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
      sig.draw.phase = phi;
      const std::complex<T> p(static_cast<T>(std::cos(phi)), static_cast<T>(std::sin(phi)));
      for (Index i = 0; i < n; ++i)
        if (chips.chips[static_cast<std::size_t>(i)]) sig.symbols[i] = p;
      break;
    }
    case PhaseModel::Kind::RandomPerSymbol: {
      sig.draw.phases.resize(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) {
        const double phi = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
        sig.draw.phases[static_cast<std::size_t>(i)] = phi;
        if (chips.chips[static_cast<std::size_t>(i)])
          sig.symbols[i] = {static_cast<T>(std::cos(phi)), static_cast<T>(std::sin(phi))};
      }
      break;
    }
    case PhaseModel::Kind::FrequencyDeviation: {
      const double df = uniform_real(rng, -model.freq_dev / 2.0, model.freq_dev / 2.0);
      sig.draw.freq_offset = df;
      for (Index i = 0; i < n; ++i) {
        if (!chips.chips[static_cast<std::size_t>(i)]) continue;
        // symbol time index is 1-based
        const double phi = 2.0 * std::numbers::pi * df * static_cast<double>(i + 1);
        sig.symbols[i] = {static_cast<T>(std::cos(phi)), static_cast<T>(std::sin(phi))};
      }
      break;
    }
  }
  return sig;
}

}  // namespace zcmsep
