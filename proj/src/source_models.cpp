// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/source_models.hpp"

#include <cmath>

namespace cbss {

namespace {

// One-sided storage keeps one entry per conjugate pair; interior bins stand
// for two full-spectrum coefficients.
inline double bin_weight(int f, int bins) { return (f == 0 || f == bins - 1) ? 1.0 : 2.0; }

inline double weighted_group_norm(const Spectrogram& z, int m, int t) {
  double g = 0.0;
  for (int f = 0; f < z.bins; ++f) g += bin_weight(f, z.bins) * std::norm(z.at(m, t, f));
  return std::sqrt(g);
}

}  // namespace

double penalty_value(const PenaltyModel& model, const Spectrogram& z) {
  double total = 0.0;
  if (model.kind == PenaltyKind::laplace_ica) {
    for (int m = 0; m < z.channels; ++m)
      for (int t = 0; t < z.frames; ++t)
        for (int f = 0; f < z.bins; ++f) total += bin_weight(f, z.bins) * std::abs(z.at(m, t, f));
  } else {
    for (int m = 0; m < z.channels; ++m)
      for (int t = 0; t < z.frames; ++t) total += weighted_group_norm(z, m, t);
  }
  return model.lambda * total;
}

Spectrogram prox_l1(const Spectrogram& z, double threshold) {
  Spectrogram out = z;
  if (threshold <= 0.0) return out;
  for (auto& c : out.data) {
    const double mag = std::abs(c);
    c = mag > threshold ? c * ((mag - threshold) / mag) : cdouble(0.0, 0.0);
  }
  return out;
}

Spectrogram prox_l21(const Spectrogram& z, double threshold) {
  Spectrogram out = z;
  if (threshold <= 0.0) return out;
  for (int m = 0; m < z.channels; ++m)
    for (int t = 0; t < z.frames; ++t) {
      const double g = weighted_group_norm(z, m, t);
      const double scale = g > threshold ? (g - threshold) / g : 0.0;
      for (int f = 0; f < z.bins; ++f) out.at(m, t, f) = z.at(m, t, f) * scale;
    }
  return out;
}

Spectrogram prox_penalty(const PenaltyModel& model, const Spectrogram& z, double mu2) {
  const double threshold = model.lambda / mu2;
  return model.kind == PenaltyKind::laplace_ica ? prox_l1(z, threshold)
                                                : prox_l21(z, threshold);
}

}  // namespace cbss
