#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"
#include "tagsig.hpp"
#include "types.hpp"

namespace zcmsep {

// Narrowband MIMO channel from d tags to M receive antennas; full column
// rank, M >= d.
template <class T = double>
struct ChannelMatrix {
  CMat<T> a;

  Index antennas() const { return a.rows(); }
  Index tags() const { return a.cols(); }
};

struct NoiseParams {
  double snr_db = 20.0;
  double sigma2 = 0.01;  // complex noise variance per sample per antenna
};

// SNR here is Eb/N0 with the convention: unit chip energy, one active chip
// per coded bit, unit mean channel power per entry, so the mean received
// energy per bit per antenna branch is 1 and sigma2 = 10^(-snr_db/10).
inline double snr_to_sigma2(double snr_db) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_to_sigma2: snr_db must be finite");
  return std::pow(10.0, -snr_db / 10.0);
}

inline NoiseParams noise_from_snr(double snr_db) { return {snr_db, snr_to_sigma2(snr_db)}; }

struct FrameSeed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
};

// Received data matrix X = A*S + W with its synthesis metadata.
template <class T = double>
struct ReceivedFrame {
  CMat<T> x;
  ChannelMatrix<T> channel;
  std::vector<TagSignal<T>> signals;
  NoiseParams noise;
  FrameSeed seed;

  Index antennas() const { return x.rows(); }
  Index samples() const { return x.cols(); }
  Index tags() const { return static_cast<Index>(signals.size()); }
};

// i.i.d. circularly symmetric complex Gaussian entries, unit variance per
// entry (Rayleigh fading, antennas spaced for spatial decorrelation).
// Redraws in the measure-zero event of a near rank-deficient matrix.
template <class T = double>
ChannelMatrix<T> draw_channel(Index antennas, Index tags, std::mt19937_64& rng) {
  if (tags < 1) throw std::invalid_argument("draw_channel: need at least one tag");
  if (antennas < tags)
    throw std::invalid_argument("draw_channel: underdetermined system (antennas < tags)");
  ChannelMatrix<T> ch;
  ch.a.resize(antennas, tags);
  for (;;) {
    for (Index j = 0; j < tags; ++j)
      for (Index i = 0; i < antennas; ++i) ch.a(i, j) = complex_gaussian<T>(rng);
    Eigen::JacobiSVD<CMat<T>> svd(ch.a);
    if (svd.singularValues().minCoeff() > static_cast<T>(1e-9)) break;
  }
  return ch;
}

template <class T = double>
ReceivedFrame<T> synthesize_frame(const ChannelMatrix<T>& channel,
                                  std::vector<TagSignal<T>> signals, const NoiseParams& noise,
                                  std::mt19937_64& rng, FrameSeed seed = {}) {
  if (static_cast<Index>(signals.size()) != channel.tags())
    throw std::invalid_argument("synthesize_frame: signal count does not match channel columns");
  if (signals.empty()) throw std::invalid_argument("synthesize_frame: no signals");
  const Index n = signals.front().size();
  for (const auto& s : signals)
    if (s.size() != n) throw std::invalid_argument("synthesize_frame: signal lengths differ");

  CMat<T> s_mat(channel.tags(), n);
  for (Index i = 0; i < channel.tags(); ++i)
    s_mat.row(i) = signals[static_cast<std::size_t>(i)].symbols.transpose();

  ReceivedFrame<T> frame;
  frame.x.noalias() = channel.a * s_mat;
  if (noise.sigma2 > 0.0) {
    const T scale = static_cast<T>(std::sqrt(noise.sigma2));
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < channel.antennas(); ++i)
        frame.x(i, j) += scale * complex_gaussian<T>(rng);
  }
  frame.channel = channel;
  frame.signals = std::move(signals);
  frame.noise = noise;
  frame.seed = seed;
  return frame;
}

// --- frame container ---------------------------------------------------
//
// Self-describing little-endian binary layout:
//   bytes 0..3   magic "ZCMF"
//   u32          format version (1)
//   u64          M (antennas), N (samples), d (tags)
//   u64          seed.master, seed.stream
//   f64          snr_db, sigma2
//   f64 pairs    M*N complex entries of X, column-major, (real, imag) each
// Only the data matrix and its seed record are stored; signals and channel
// are reproducible from the seed.

namespace detail {
inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  os.write(b, 4);
}
inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  os.write(b, 8);
}
inline void put_f64(std::ostream& os, double v) {
  char b[8];
  std::memcpy(b, &v, 8);
  os.write(b, 8);
}
inline std::uint32_t get_u32(std::istream& is) {
  char b[4];
  is.read(b, 4);
  std::uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}
inline std::uint64_t get_u64(std::istream& is) {
  char b[8];
  is.read(b, 8);
  std::uint64_t v;
  std::memcpy(&v, b, 8);
  return v;
}
inline double get_f64(std::istream& is) {
  char b[8];
  is.read(b, 8);
  double v;
  std::memcpy(&v, b, 8);
  return v;
}
}  // namespace detail

template <class T>
void write_frame(const ReceivedFrame<T>& frame, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_frame: cannot open " + path);
  os.write("ZCMF", 4);
  detail::put_u32(os, 1u);
  detail::put_u64(os, static_cast<std::uint64_t>(frame.antennas()));
  detail::put_u64(os, static_cast<std::uint64_t>(frame.samples()));
  detail::put_u64(os, static_cast<std::uint64_t>(frame.tags()));
  detail::put_u64(os, frame.seed.master);
  detail::put_u64(os, frame.seed.stream);
  detail::put_f64(os, frame.noise.snr_db);
  detail::put_f64(os, frame.noise.sigma2);
  for (Index j = 0; j < frame.samples(); ++j)
    for (Index i = 0; i < frame.antennas(); ++i) {
      detail::put_f64(os, static_cast<double>(frame.x(i, j).real()));
      detail::put_f64(os, static_cast<double>(frame.x(i, j).imag()));
    }
  if (!os) throw std::runtime_error("write_frame: write failed for " + path);
}

// Loads the data-matrix container written by write_frame. The returned
// frame carries X and metadata only (empty signal list and channel).
template <class T = double>
ReceivedFrame<T> read_frame(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_frame: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ZCMF", 4) != 0)
    throw std::runtime_error("read_frame: bad magic in " + path);
  const std::uint32_t version = detail::get_u32(is);
  if (version != 1u) throw std::runtime_error("read_frame: unsupported version in " + path);
  ReceivedFrame<T> frame;
  const auto m = static_cast<Index>(detail::get_u64(is));
  const auto n = static_cast<Index>(detail::get_u64(is));
  const auto d = static_cast<Index>(detail::get_u64(is));
  frame.seed.master = detail::get_u64(is);
  frame.seed.stream = detail::get_u64(is);
  frame.noise.snr_db = detail::get_f64(is);
  frame.noise.sigma2 = detail::get_f64(is);
  if (m < 1 || n < 1 || d < 0) throw std::runtime_error("read_frame: bad dimensions in " + path);
  frame.x.resize(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) {
      const double re = detail::get_f64(is);
      const double im = detail::get_f64(is);
      frame.x(i, j) = {static_cast<T>(re), static_cast<T>(im)};
    }
  if (!is) throw std::runtime_error("read_frame: truncated file " + path);
  return frame;
}

}  // namespace zcmsep
