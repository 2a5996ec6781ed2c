// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cbss/mixsim.hpp"
#include "cbss/stft.hpp"

namespace cbss {

// Winner-take-all across channels per (frame, bin): the loudest channel keeps
// its value, the others are zeroed. Makes a stack of source spectrograms
// per-bin exclusive.
Spectrogram make_exclusive(const Spectrogram& stack);

// Fraction of output energy that the assigned references cannot explain:
// sum_i ||out_i - P_span(ref_assigned(i))(out_i)||^2 / sum_i ||out_i||^2,
// with the assignment chosen to minimize the fraction.
double leakage_fraction(const std::vector<Eigen::VectorXd>& outputs,
                        const std::vector<Eigen::VectorXd>& refs, int filter_len);

struct ConsistencyDemo {
  Spectrogram pulse, pulse_proj, pulse_proj2;
  Spectrogram dropped, dropped_proj, dropped_proj2;
  double pulse_inconsistency = 0.0;    // residual of the raw pulse pattern
  double dropped_inconsistency = 0.0;  // residual of the dropout spectrogram
  double pulse_fixed_point = 0.0;      // ||proj^2 - proj|| / ||proj||
  double dropped_fixed_point = 0.0;
};

// Pulse pattern: a handful of isolated unit bins (seeded); dropout row: the
// speech spectrogram with entries zeroed at the given rate.
ConsistencyDemo run_consistency_demo(const Eigen::VectorXd& speech, double sample_rate,
                                     const WindowPair& win, double dropout_rate,
                                     std::uint64_t seed);

struct PermutationDemo {
  Spectrogram exclusive;  // 2 channels, per-bin exclusive sources
  Spectrogram scrambled;
  Spectrogram projected;
  double leakage_identity = 0.0;
  double leakage_scrambled = 0.0;
};

PermutationDemo run_permutation_demo(const Eigen::VectorXd& source_a,
                                     const Eigen::VectorXd& source_b, double sample_rate,
                                     const WindowPair& win, std::uint64_t seed, int filter_len);

}  // namespace cbss
