// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "cbss/errors.hpp"

namespace cbss {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// FFTW's planner is not thread-safe; execution through per-thread buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlans {
  int fft_size = 0;
  double* real_buf = nullptr;
  fftw_complex* cplx_buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit FftPlans(int F) : fft_size(F) {
    real_buf = fftw_alloc_real(F);
    cplx_buf = fftw_alloc_complex(F / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(F, real_buf, cplx_buf, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(F, cplx_buf, real_buf, FFTW_ESTIMATE);
  }

  ~FftPlans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real_buf);
    fftw_free(cplx_buf);
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
};

FftPlans& plans_for(int fft_size) {
  thread_local std::unordered_map<int, std::unique_ptr<FftPlans>> cache;
  auto it = cache.find(fft_size);
  if (it == cache.end())
    it = cache.emplace(fft_size, std::make_unique<FftPlans>(fft_size)).first;
  return *it->second;
}

Eigen::VectorXd base_window(WindowShape shape, int fft_size) {
  Eigen::VectorXd v(fft_size);
  switch (shape) {
    case WindowShape::hann:
      for (int n = 0; n < fft_size; ++n)
        v[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / fft_size);
      break;
    case WindowShape::rectangular:
      v.setOnes();
      break;
  }
  return v;
}

void check_geometry(int fft_size, int hop) {
  if (fft_size < 2 || fft_size % 2 != 0)
    throw ConfigError("window length must be even and at least 2");
  if (hop <= 0 || hop > fft_size) throw ConfigError("hop must be in [1, window length]");
  if (fft_size % hop != 0) throw ConfigError("hop must divide the window length");
}

// Periodized sum of squared hop shifts, one value per residue class.
Eigen::VectorXd shift_normalizer(const Eigen::VectorXd& v, int hop) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(hop);
  for (int n = 0; n < v.size(); ++n) s[n % hop] += v[n] * v[n];
  for (int r = 0; r < hop; ++r)
    if (s[r] < 1e-300)
      throw DegenerateWindowError("window has a gap: zero normalizer at residue " +
                                  std::to_string(r));
  return s;
}

void check_signal(const TimeSignal& x, const WindowPair& win) {
  if (x.channels() < 1) throw DimensionError("stft: need at least one channel");
  if (x.length() % win.hop != 0)
    throw ConfigError("stft: signal length must be a multiple of the hop; pad first");
  if (x.length() < win.fft_size())
    throw ConfigError("stft: signal shorter than the analysis window");
}

void check_grid(const Spectrogram& g, const WindowPair& win) {
  const int F = win.fft_size();
  if (g.fft_size != F || g.hop != win.hop || g.bins != F / 2 + 1)
    throw DimensionError("istft: spectrogram grid does not match the window pair");
  if (g.signal_len() < F) throw DimensionError("istft: fewer frames than one window span");
}

}  // namespace

bool WindowPair::is_tight() const {
  return analysis.size() == synthesis.size() && (analysis - synthesis).norm() == 0.0;
}

double WindowPair::pr_residual() const {
  const int F = fft_size();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(hop);
  for (int n = 0; n < F; ++n) s[n % hop] += analysis[n] * synthesis[n];
  double worst = 0.0;
  for (int r = 0; r < hop; ++r) worst = std::max(worst, std::abs(F * s[r] - 1.0));
  return worst;
}

void WindowPair::validate() const {
  check_geometry(fft_size(), hop);
  if (synthesis.size() != analysis.size())
    throw ConfigError("window pair: analysis/synthesis lengths differ");
  if (pr_residual() > 1e-8)
    throw ConfigError("window pair does not satisfy perfect reconstruction");
}

WindowPair design_tight_window(WindowShape shape, int fft_size, int hop) {
  check_geometry(fft_size, hop);
  const Eigen::VectorXd v = base_window(shape, fft_size);
  const Eigen::VectorXd s = shift_normalizer(v, hop);
  WindowPair w;
  w.hop = hop;
  w.analysis.resize(fft_size);
  for (int n = 0; n < fft_size; ++n)
    w.analysis[n] = v[n] / std::sqrt(fft_size * s[n % hop]);
  w.synthesis = w.analysis;
  return w;
}

WindowPair design_dual_pair(WindowShape shape, int fft_size, int hop) {
  check_geometry(fft_size, hop);
  const Eigen::VectorXd v = base_window(shape, fft_size);
  const Eigen::VectorXd s = shift_normalizer(v, hop);
  WindowPair w;
  w.hop = hop;
  w.analysis = v;
  w.synthesis.resize(fft_size);
  for (int n = 0; n < fft_size; ++n) w.synthesis[n] = v[n] / (fft_size * s[n % hop]);
  return w;
}

Spectrogram stft(const TimeSignal& x, const WindowPair& win) {
  win.validate();
  check_signal(x, win);
  const int F = win.fft_size();
  const int B = F / 2 + 1;
  const long L = x.length();
  const int T = static_cast<int>(L / win.hop);
  const int M = x.channels();

  FftPlans& fft = plans_for(F);
  Spectrogram out = Spectrogram::zeros(M, T, B, F, win.hop, x.sample_rate);
  for (int m = 0; m < M; ++m) {
    for (int t = 0; t < T; ++t) {
      const long base = static_cast<long>(t) * win.hop;
      for (int n = 0; n < F; ++n)
        fft.real_buf[n] = win.analysis[n] * x.samples(m, (base + n) % L);
      fftw_execute(fft.fwd);
      for (int f = 0; f < B; ++f)
        out.at(m, t, f) = cdouble(fft.cplx_buf[f][0], fft.cplx_buf[f][1]);
    }
  }
  return out;
}

TimeSignal istft(const Spectrogram& g, const WindowPair& win) {
  win.validate();
  check_grid(g, win);
  const int F = win.fft_size();
  const int B = g.bins;
  const long L = g.signal_len();
  const int M = g.channels;

  FftPlans& fft = plans_for(F);
  TimeSignal out;
  out.sample_rate = g.sample_rate;
  out.samples = Eigen::MatrixXd::Zero(M, L);
  for (int m = 0; m < M; ++m) {
    for (int t = 0; t < g.frames; ++t) {
      for (int f = 0; f < B; ++f) {
        const cdouble c = g.at(m, t, f);
        fft.cplx_buf[f][0] = c.real();
        fft.cplx_buf[f][1] = c.imag();
      }
      // Edge bins have no mirrored copy; their imaginary parts are dropped.
      fft.cplx_buf[0][1] = 0.0;
      fft.cplx_buf[B - 1][1] = 0.0;
      fftw_execute(fft.inv);
      const long base = static_cast<long>(t) * win.hop;
      for (int n = 0; n < F; ++n)
        out.samples(m, (base + n) % L) += win.synthesis[n] * fft.real_buf[n];
    }
  }
  return out;
}

Spectrogram project_consistent(const Spectrogram& g, const WindowPair& win) {
  return stft(istft(g, win), win);
}

Spectrogram project_consistent_adjoint(const Spectrogram& g, const WindowPair& win) {
  return project_consistent(g, win.swapped());
}

double consistency_residual(const Spectrogram& g, const WindowPair& win) {
  Spectrogram r = g;
  add_scaled(r, project_consistent(g, win), -1.0);
  return r.norm() / std::max(g.norm(), 1e-300);
}

}  // namespace cbss
