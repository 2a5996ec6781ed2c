// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "cbss/errors.hpp"

namespace cbss {

using cdouble = std::complex<double>;

// Multichannel audio in the time domain, one row per channel.
struct TimeSignal {
  Eigen::MatrixXd samples;  // channels x length
  double sample_rate = 16000.0;

  TimeSignal() = default;
  TimeSignal(Eigen::MatrixXd s, double rate) : samples(std::move(s)), sample_rate(rate) {}

  int channels() const { return static_cast<int>(samples.rows()); }
  long length() const { return static_cast<long>(samples.cols()); }

  Eigen::VectorXd channel(int m) const { return samples.row(m).transpose(); }

  static TimeSignal from_mono(const Eigen::VectorXd& x, double rate) {
    TimeSignal s;
    s.samples = x.transpose();
    s.sample_rate = rate;
    return s;
  }

  // Zero-pad on the right so the length is a multiple of `hop`.
  TimeSignal padded_to_multiple(int hop) const {
    const long len = length();
    const long padded = ((len + hop - 1) / hop) * hop;
    TimeSignal out;
    out.sample_rate = sample_rate;
    out.samples = Eigen::MatrixXd::Zero(channels(), padded);
    out.samples.leftCols(len) = samples;
    return out;
  }
};

// One-sided complex time-frequency grid, bins 0..fft_size/2.
// Layout: channel-major, then frame, bin fastest.
struct Spectrogram {
  int channels = 0;
  int frames = 0;
  int bins = 0;
  int fft_size = 0;
  int hop = 0;
  double sample_rate = 0.0;
  std::vector<cdouble> data;

  static Spectrogram zeros(int channels, int frames, int bins, int fft_size, int hop,
                           double sample_rate) {
    Spectrogram s;
    s.channels = channels;
    s.frames = frames;
    s.bins = bins;
    s.fft_size = fft_size;
    s.hop = hop;
    s.sample_rate = sample_rate;
    s.data.assign(static_cast<std::size_t>(channels) * frames * bins, cdouble(0.0, 0.0));
    return s;
  }

  Spectrogram like_zeros() const {
    return zeros(channels, frames, bins, fft_size, hop, sample_rate);
  }

  long signal_len() const { return static_cast<long>(frames) * hop; }

  std::size_t index(int m, int t, int f) const {
    return (static_cast<std::size_t>(m) * frames + t) * bins + f;
  }
  cdouble& at(int m, int t, int f) { return data[index(m, t, f)]; }
  const cdouble& at(int m, int t, int f) const { return data[index(m, t, f)]; }

  bool same_grid(const Spectrogram& o) const {
    return channels == o.channels && frames == o.frames && bins == o.bins &&
           fft_size == o.fft_size && hop == o.hop;
  }

  // Plain Frobenius norm over stored entries.
  double norm() const {
    double s = 0.0;
    for (const cdouble& v : data) s += std::norm(v);
    return std::sqrt(s);
  }

  // Norm matching time-domain energy: interior bins carry both half-spectrum
  // copies, so they are weighted twice.
  double weighted_norm() const {
    double s = 0.0;
    for (int m = 0; m < channels; ++m)
      for (int t = 0; t < frames; ++t)
        for (int f = 0; f < bins; ++f) {
          const double w = (f == 0 || f == bins - 1) ? 1.0 : 2.0;
          s += w * std::norm(at(m, t, f));
        }
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (const cdouble& v : data)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

inline void check_same_grid(const Spectrogram& a, const Spectrogram& b, const char* where) {
  if (!a.same_grid(b)) throw DimensionError(std::string(where) + ": spectrogram grids differ");
}

inline Spectrogram& scale_inplace(Spectrogram& a, double s) {
  for (cdouble& v : a.data) v *= s;
  return a;
}

inline Spectrogram& add_scaled(Spectrogram& a, const Spectrogram& b, double s) {
  check_same_grid(a, b, "add_scaled");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += s * b.data[i];
  return a;
}

inline double distance(const Spectrogram& a, const Spectrogram& b) {
  check_same_grid(a, b, "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += std::norm(a.data[i] - b.data[i]);
  return std::sqrt(s);
}

// Real part of the full inner product, interior bins doubled to match the
// underlying two-sided grid.
inline double weighted_dot(const Spectrogram& a, const Spectrogram& b) {
  check_same_grid(a, b, "weighted_dot");
  double s = 0.0;
  for (int m = 0; m < a.channels; ++m)
    for (int t = 0; t < a.frames; ++t)
      for (int f = 0; f < a.bins; ++f) {
        const double w = (f == 0 || f == a.bins - 1) ? 1.0 : 2.0;
        s += w * std::real(std::conj(a.at(m, t, f)) * b.at(m, t, f));
      }
  return s;
}

}  // namespace cbss
