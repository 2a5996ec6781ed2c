// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/mixsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbss/errors.hpp"

namespace cbss {

namespace {

constexpr double kPi = 3.14159265358979323846;

double condition_of(const Eigen::MatrixXd& a) {
  const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

Eigen::MatrixXd random_mixing_matrix(Rng& rng, int mics, int sources, double max_condition) {
  if (sources < 1 || mics < sources)
    throw ConfigError("mixing matrix: need at least as many mics as sources");
  if (!(max_condition >= 1.0)) throw ConfigError("mixing matrix: condition cap must be >= 1");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::MatrixXd a(mics, sources);
    for (int i = 0; i < mics; ++i)
      for (int j = 0; j < sources; ++j) a(i, j) = rng.normal();
    if (condition_of(a) <= max_condition) return a;
  }
  throw ConfigError("mixing matrix: no draw met the condition cap in 1000 attempts");
}

Eigen::VectorXd synth_rir(Rng& rng, int taps, double decay) {
  if (taps < 1) throw ConfigError("rir: need at least one tap");
  if (!(decay > 0.0)) throw ConfigError("rir: decay must be positive");
  Eigen::VectorXd r(taps);
  for (int k = 0; k < taps; ++k) r(k) = rng.normal() * std::exp(-k / decay);
  r(0) = std::abs(r(0));
  const double energy = r.norm();
  if (energy < 1e-300) {
    r.setZero();
    r(0) = 1.0;
    return r;
  }
  return r / energy;
}

MixSpec make_instantaneous_spec(std::uint64_t seed, int mics, int sources,
                                double max_condition) {
  Rng rng(seed, "mixing-matrix");
  MixSpec spec;
  spec.kind = MixKind::instantaneous;
  spec.matrix = random_mixing_matrix(rng, mics, sources, max_condition);
  spec.seed = seed;
  return spec;
}

MixSpec make_convolutive_spec(std::uint64_t seed, int mics, int sources, int taps,
                              double decay) {
  if (mics < 1 || sources < 1) throw ConfigError("mix spec: channel counts must be positive");
  Rng rng(seed, "rir");
  MixSpec spec;
  spec.kind = MixKind::convolutive;
  spec.rirs.resize(mics);
  for (int i = 0; i < mics; ++i) {
    spec.rirs[i].reserve(sources);
    for (int j = 0; j < sources; ++j) spec.rirs[i].push_back(synth_rir(rng, taps, decay));
  }
  spec.seed = seed;
  return spec;
}

TimeSignal mix_instantaneous(const Eigen::MatrixXd& a, const TimeSignal& sources) {
  if (a.cols() != sources.channels())
    throw DimensionError("mix: matrix columns must equal the source channel count");
  const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  if (!(sv(sv.size() - 1) > sv(0) * 1e-12)) throw ConfigError("mix: mixing matrix is singular");
  return TimeSignal(a * sources.samples, sources.sample_rate);
}

TimeSignal mix_convolutive(const std::vector<std::vector<Eigen::VectorXd>>& rirs,
                           const TimeSignal& sources) {
  const int mics = static_cast<int>(rirs.size());
  const int srcs = sources.channels();
  if (mics < 1) throw DimensionError("mix: need at least one response row");
  for (const auto& row : rirs)
    if (static_cast<int>(row.size()) != srcs)
      throw DimensionError("mix: response grid must be mics x sources");

  const long n = sources.length();
  TimeSignal out;
  out.sample_rate = sources.sample_rate;
  out.samples = Eigen::MatrixXd::Zero(mics, n);
  for (int i = 0; i < mics; ++i)
    for (int j = 0; j < srcs; ++j) {
      const Eigen::VectorXd& h = rirs[i][j];
      const long taps = std::min<long>(h.size(), n);
      for (long k = 0; k < taps; ++k)
        out.samples.row(i).segment(k, n - k) += h(k) * sources.samples.row(j).segment(0, n - k);
    }
  return out;
}

TimeSignal mix(const MixSpec& spec, const TimeSignal& sources) {
  return spec.kind == MixKind::instantaneous ? mix_instantaneous(spec.matrix, sources)
                                             : mix_convolutive(spec.rirs, sources);
}

PermutationPlan PermutationPlan::identity(int channels, int bins) {
  PermutationPlan p;
  std::vector<int> row(channels);
  std::iota(row.begin(), row.end(), 0);
  p.perm.assign(bins, row);
  return p;
}

PermutationPlan PermutationPlan::random(std::uint64_t seed, int channels, int bins) {
  Rng rng(seed, "permutation");
  PermutationPlan p = identity(channels, bins);
  for (auto& row : p.perm)
    for (int i = channels - 1; i > 0; --i) std::swap(row[i], row[rng.uniform_int(0, i)]);
  return p;
}

PermutationPlan PermutationPlan::inverse() const {
  PermutationPlan inv = *this;
  for (int f = 0; f < bins(); ++f)
    for (int c = 0; c < channels(); ++c) inv.perm[f][perm[f][c]] = c;
  return inv;
}

Spectrogram scramble_permutation(const Spectrogram& s, const PermutationPlan& plan) {
  if (plan.bins() != s.bins || plan.channels() != s.channels)
    throw DimensionError("scramble: plan shape must match the spectrogram");
  Spectrogram out = s.like_zeros();
  for (int f = 0; f < s.bins; ++f)
    for (int c = 0; c < s.channels; ++c) {
      const int from = plan.perm[f][c];
      if (from < 0 || from >= s.channels) throw ConfigError("scramble: plan entry out of range");
      for (int t = 0; t < s.frames; ++t) out.at(c, t, f) = s.at(from, t, f);
    }
  return out;
}

Spectrogram dropout(const Spectrogram& s, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("dropout: rate must lie in [0, 1]");
  Rng rng(seed, "dropout");
  Spectrogram out = s;
  // Entries are visited in storage order, one uniform draw each.
  for (auto& c : out.data)
    if (rng.uniform() < rate) c = cdouble(0.0, 0.0);
  return out;
}

namespace {

double edge_envelope(long k, long len, long edge) {
  if (k < edge) return 0.5 * (1.0 - std::cos(kPi * (k + 1) / (edge + 1)));
  if (k >= len - edge) return 0.5 * (1.0 - std::cos(kPi * (len - k) / (edge + 1)));
  return 1.0;
}

double resonance_gain(double hz, const double* centers, const double* widths, int count) {
  double g = 0.0;
  for (int j = 0; j < count; ++j) {
    const double d = (hz - centers[j]) / widths[j];
    g += 1.0 / (1.0 + d * d);
  }
  return g;
}

}  // namespace

Eigen::VectorXd speechlike(std::uint64_t seed, long num_samples, double sample_rate) {
  if (num_samples < 1) throw ConfigError("speechlike: need at least one sample");
  if (!(sample_rate > 0.0)) throw ConfigError("speechlike: sample rate must be positive");

  Rng rng(seed, "speechlike");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_samples);
  const double base_f0 = rng.uniform(95.0, 220.0);
  const double top_hz = std::min(6000.0, 0.45 * sample_rate);

  long pos = 0;
  bool first = true;
  while (pos < num_samples) {
    // Segment mix: mostly voiced syllables, some fricative-like noise bursts,
    // some silence. The opening segment is always voiced so no seed produces
    // an empty signal.
    const double u = first ? 1.0 : rng.uniform();
    first = false;

    if (u < 0.25) {
      pos += std::lround(rng.uniform(0.04, 0.16) * sample_rate);
      continue;
    }

    if (u < 0.45) {
      const long dur = std::lround(rng.uniform(0.06, 0.15) * sample_rate);
      const long len = std::min(dur, num_samples - pos);
      const double center = rng.uniform(1500.0, std::max(1600.0, top_hz - 800.0));
      const double bw = rng.uniform(400.0, 1200.0);
      const double r = std::exp(-kPi * bw / sample_rate);
      const double a1 = 2.0 * r * std::cos(2.0 * kPi * center / sample_rate);
      const double a2 = -r * r;
      const long edge = std::min<long>(std::lround(0.015 * sample_rate), len / 4 + 1);
      const double gain = 0.02 * std::exp(rng.uniform(-1.2, 0.4));
      double y1 = 0.0, y2 = 0.0;
      for (long k = 0; k < len; ++k) {
        const double y = rng.normal() + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        x(pos + k) += gain * edge_envelope(k, len, edge) * y;
      }
      pos += dur;
      continue;
    }

    const long dur = std::lround(rng.uniform(0.12, 0.28) * sample_rate);
    const long len = std::min(dur, num_samples - pos);
    const double f0 = base_f0 * (1.0 + rng.uniform(-0.12, 0.12));
    const double drift = rng.uniform(-0.08, 0.08);
    const double centers[3] = {rng.uniform(350.0, 850.0), rng.uniform(1000.0, 2200.0),
                               rng.uniform(2300.0, 3200.0)};
    const double widths[3] = {rng.uniform(60.0, 140.0), rng.uniform(90.0, 220.0),
                              rng.uniform(140.0, 320.0)};

    const int harmonics = std::clamp(static_cast<int>(top_hz / f0), 1, 64);
    std::vector<double> amp(harmonics), phase(harmonics);
    for (int h = 0; h < harmonics; ++h) {
      const double hz = (h + 1) * f0;
      // Resonance bumps over a small floor and a mild tilt keep every band
      // alive rather than rolling the top off steeply.
      amp[h] = (0.12 + resonance_gain(hz, centers, widths, 3)) /
               std::sqrt(1.0 + (hz / 3500.0) * (hz / 3500.0)) * rng.uniform(0.8, 1.2);
      phase[h] = rng.uniform(0.0, 2.0 * kPi);
    }

    const long edge = std::min<long>(std::lround(0.02 * sample_rate), len / 4 + 1);
    // Stress pattern: syllable loudness spreads over roughly 14 dB, and each
    // syllable decays a little toward its end.
    const double gain = 0.35 * std::exp(rng.uniform(-1.2, 0.4));
    double psi = rng.uniform(0.0, 2.0 * kPi);
    for (long k = 0; k < len; ++k) {
      psi += 2.0 * kPi * f0 * (1.0 + drift * k / len) / sample_rate;
      double v = 0.0;
      for (int h = 0; h < harmonics; ++h) v += amp[h] * std::sin((h + 1) * psi + phase[h]);
      const double sag = 1.0 - 0.45 * k / len;
      x(pos + k) += gain * sag * edge_envelope(k, len, edge) * v;
    }
    pos += dur;
  }

  const double peak = x.cwiseAbs().maxCoeff();
  if (peak > 0.0) x *= 0.5 / peak;
  return x;
}

}  // namespace cbss
