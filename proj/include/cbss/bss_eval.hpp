// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cbss/spectrogram.hpp"

namespace cbss {

// dB values are clamped to [-kDbCap, kDbCap].
inline constexpr double kDbCap = 200.0;

struct Decomposition {
  Eigen::VectorXd target;
  Eigen::VectorXd interference;
  Eigen::VectorXd artifact;
  bool regularized = false;  // Gram system was rank-deficient
};

// Least-squares projections onto spans of delayed reference copies
// (delays 0..filter_len-1). The Gram factorization is shared across
// estimates, so build once per reference set.
class ReferenceBasis {
 public:
  ReferenceBasis(std::vector<Eigen::VectorXd> refs, int filter_len);

  int count() const { return static_cast<int>(refs_.size()); }
  int filter_len() const { return filter_len_; }
  long length() const { return refs_.empty() ? 0 : refs_[0].size(); }
  bool regularized() const { return regularized_; }

  // target: projection onto the assigned reference's span alone;
  // interference: remainder of the all-reference projection;
  // artifact: residual outside every reference span.
  Decomposition decompose(const Eigen::VectorXd& estimate, int target_index) const;

  // Projection onto all reference spans combined.
  Eigen::VectorXd project_all(const Eigen::VectorXd& estimate) const;

 private:
  Eigen::VectorXd solve_all(const Eigen::VectorXd& estimate) const;
  Eigen::VectorXd synth(const Eigen::VectorXd& coeffs) const;  // sum of shifted refs

  std::vector<Eigen::VectorXd> refs_;
  int filter_len_ = 1;
  Eigen::MatrixXd gram_;                                // ridged
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt_;              // all refs
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> block_ldlt_;  // single ref blocks
  bool regularized_ = false;
};

Decomposition decompose(const Eigen::VectorXd& estimate, const std::vector<Eigen::VectorXd>& refs,
                        int target_index, int filter_len);

struct Metrics {
  double sdr_db = 0.0;
  double sir_db = 0.0;
  double sar_db = 0.0;
};

Metrics sdr_sir_sar(const Decomposition& d);

// Assignment of estimates to references maximizing mean SIR, exhaustive over
// permutations (estimate count must be <= 4).
std::vector<int> best_permutation_align(const std::vector<Eigen::VectorXd>& estimates,
                                        const ReferenceBasis& basis);

struct MetricsReport {
  std::vector<int> assignment;             // estimate i -> reference assignment[i]
  std::vector<Metrics> per_source;         // estimate i vs its assigned reference
  std::vector<Metrics> mixture_baseline;   // indexed by reference
  std::vector<Metrics> improvement;        // per_source minus baseline of assigned ref
  bool regularized = false;
};

MetricsReport evaluate(const std::vector<Eigen::VectorXd>& estimates,
                       const std::vector<Eigen::VectorXd>& refs, int filter_len);

// Also scores each mixture channel against the references (same assignment
// convention) and reports per-metric dB improvements over that baseline.
MetricsReport evaluate_with_baseline(const std::vector<Eigen::VectorXd>& estimates,
                                     const TimeSignal& mixture,
                                     const std::vector<Eigen::VectorXd>& refs, int filter_len);

std::vector<Eigen::VectorXd> channels_of(const TimeSignal& x);

}  // namespace cbss
