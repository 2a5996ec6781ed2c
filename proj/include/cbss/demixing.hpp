// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cbss/spectrogram.hpp"

namespace cbss {

// Returned by the log-det penalty when a matrix in the stack is singular.
inline constexpr double kSingularSentinel = 1e300;

// One square demixing matrix per one-sided frequency bin.
struct DemixStack {
  std::vector<Eigen::MatrixXcd> mats;

  int bins() const { return static_cast<int>(mats.size()); }
  int channels() const { return mats.empty() ? 0 : static_cast<int>(mats[0].rows()); }

  static DemixStack identity(int channels, int bins) {
    DemixStack w;
    w.mats.assign(bins, Eigen::MatrixXcd::Identity(channels, channels));
    return w;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& m : mats) s += m.squaredNorm();
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (const auto& m : mats)
      if (!m.allFinite()) return false;
    return true;
  }
};

double stack_distance(const DemixStack& a, const DemixStack& b);
DemixStack& stack_add_scaled(DemixStack& a, const DemixStack& b, double s);
DemixStack& stack_scale(DemixStack& a, double s);

// Row-major entries of each matrix, bins concatenated in ascending order.
Eigen::VectorXcd vectorize(const DemixStack& w);
DemixStack devectorize(const Eigen::VectorXcd& v, int channels, int bins);

// Mixture spectrogram with per-bin frame-by-channel views.
class ObservationTensor {
 public:
  explicit ObservationTensor(Spectrogram spec) : spec_(std::move(spec)) {}

  const Spectrogram& spec() const { return spec_; }
  int channels() const { return spec_.channels; }
  int frames() const { return spec_.frames; }
  int bins() const { return spec_.bins; }

  using ChiView = Eigen::Map<const Eigen::MatrixXcd, Eigen::Unaligned,
                             Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

  // frames x channels matrix of bin f; column m is channel m's frame series.
  ChiView chi(int f) const {
    const long T = spec_.frames, B = spec_.bins;
    return ChiView(spec_.data.data() + f, T, spec_.channels,
                   Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(T * B, B));
  }

  void scale(double s) { scale_inplace(spec_, s); }

 private:
  Spectrogram spec_;
};

// Per-bin matrix product: out[n][t,f] = sum_m W[f](n,m) x[m][t,f].
Spectrogram apply_demix(const DemixStack& w, const ObservationTensor& obs);

// Adjoint of apply_demix in w: result[f](n,m) = sum_t conj(x[m][t,f]) y[n][t,f].
DemixStack adjoint_correlate(const ObservationTensor& obs, const Spectrogram& y);

// -sum_f sum_m log sigma_m(W[f]) over the full two-sided spectrum: interior
// one-sided bins count twice. kSingularSentinel if any matrix is singular.
double logdet_penalty(const DemixStack& w);

// Per-bin SVD shrinkage: each singular value sigma is replaced by
// (sigma + sqrt(sigma^2 + 4*mu)) / 2; singular vectors are kept.
DemixStack prox_logdet(const DemixStack& w, double mu);

// Largest singular value over the per-bin frame-by-channel blocks; equals the
// operator norm of the block-diagonal observation operator.
double operator_norm(const ObservationTensor& obs);

}  // namespace cbss
