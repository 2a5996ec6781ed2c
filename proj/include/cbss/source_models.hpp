// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "cbss/spectrogram.hpp"

namespace cbss {

// laplace_ica: entrywise magnitudes, independent per bin.
// laplace_iva: one group per (channel, frame), l2 across the frequency axis.
// Values and group norms follow the full two-sided spectrum: an interior bin
// of the one-sided storage stands for a conjugate pair and counts twice.
enum class PenaltyKind { laplace_ica, laplace_iva };

inline double default_lambda(PenaltyKind kind) {
  return kind == PenaltyKind::laplace_ica ? 0.1 : 1.0;
}

struct PenaltyModel {
  PenaltyKind kind = PenaltyKind::laplace_ica;
  double lambda = 0.1;

  static PenaltyModel make(PenaltyKind kind) { return {kind, default_lambda(kind)}; }
};

double penalty_value(const PenaltyModel& model, const Spectrogram& z);

// Entrywise soft threshold: z -> (1 - thr/|z|)_+ z. The conjugate-pair
// weights cancel between the penalty and the quadratic term, so the
// threshold is uniform across bins.
Spectrogram prox_l1(const Spectrogram& z, double threshold);

// Group soft threshold per (channel, frame) vector; the group norm doubles
// interior bins to match the two-sided spectrum.
Spectrogram prox_l21(const Spectrogram& z, double threshold);

// prox of penalty/mu2, i.e. soft threshold with effective threshold lambda/mu2.
Spectrogram prox_penalty(const PenaltyModel& model, const Spectrogram& z, double mu2);

// Extension contract for the solver: a model is a value plus the prox of
// value/mu2. New models plug in here without touching the solver.
class SourceModel {
 public:
  virtual ~SourceModel() = default;
  virtual double value(const Spectrogram& z) const = 0;
  virtual Spectrogram prox(const Spectrogram& z, double mu2) const = 0;
};

class LaplaceModel final : public SourceModel {
 public:
  explicit LaplaceModel(PenaltyModel cfg) : cfg_(cfg) {}
  double value(const Spectrogram& z) const override { return penalty_value(cfg_, z); }
  Spectrogram prox(const Spectrogram& z, double mu2) const override {
    return prox_penalty(cfg_, z, mu2);
  }
  const PenaltyModel& config() const { return cfg_; }

 private:
  PenaltyModel cfg_;
};

}  // namespace cbss
