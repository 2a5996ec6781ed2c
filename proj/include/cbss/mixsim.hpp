// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cbss/rng.hpp"
#include "cbss/spectrogram.hpp"

namespace cbss {

enum class MixKind { instantaneous, convolutive };

struct MixSpec {
  MixKind kind = MixKind::instantaneous;
  Eigen::MatrixXd matrix;                          // mics x sources
  std::vector<std::vector<Eigen::VectorXd>> rirs;  // [mic][source]
  std::uint64_t seed = 0;
};

// Gaussian entries, redrawn until the condition number is acceptable.
Eigen::MatrixXd random_mixing_matrix(Rng& rng, int mics, int sources,
                                     double max_condition = 10.0);

// Exponentially decaying noise tail, unit energy, positive first tap.
// decay is the envelope time constant in samples; decay -> inf gives a
// flat noise response.
Eigen::VectorXd synth_rir(Rng& rng, int taps, double decay);

MixSpec make_instantaneous_spec(std::uint64_t seed, int mics, int sources,
                                double max_condition = 10.0);
MixSpec make_convolutive_spec(std::uint64_t seed, int mics, int sources, int taps, double decay);

// x = A s, sample by sample. Rejects singular matrices.
TimeSignal mix_instantaneous(const Eigen::MatrixXd& a, const TimeSignal& sources);

// Linear convolution, truncated to the source length.
TimeSignal mix_convolutive(const std::vector<std::vector<Eigen::VectorXd>>& rirs,
                           const TimeSignal& sources);

TimeSignal mix(const MixSpec& spec, const TimeSignal& sources);

// Channel permutation per frequency bin.
struct PermutationPlan {
  std::vector<std::vector<int>> perm;  // [bin][output channel] -> input channel

  int bins() const { return static_cast<int>(perm.size()); }
  int channels() const { return perm.empty() ? 0 : static_cast<int>(perm[0].size()); }

  static PermutationPlan identity(int channels, int bins);
  static PermutationPlan random(std::uint64_t seed, int channels, int bins);
  PermutationPlan inverse() const;
};

// out[c][t,f] = in[plan[f][c]][t,f]; applying plan.inverse() restores input.
Spectrogram scramble_permutation(const Spectrogram& s, const PermutationPlan& plan);

// Each stored entry is zeroed independently with the given probability.
Spectrogram dropout(const Spectrogram& s, double rate, std::uint64_t seed);

// Deterministic speech-like test signal: syllabic bursts of pitched harmonics
// shaped by formant-style resonances, interleaved with noise bursts and
// silences. Peak-normalized to 0.5.
Eigen::VectorXd speechlike(std::uint64_t seed, long num_samples, double sample_rate);

// The two fixtures bundled under data/ are speechlike(11, .) and
// speechlike(29, .) at 16 kHz.
inline constexpr std::uint64_t kFixtureSeedA = 11;
inline constexpr std::uint64_t kFixtureSeedB = 29;

}  // namespace cbss
