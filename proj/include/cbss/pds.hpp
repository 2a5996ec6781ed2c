// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <iosfwd>
#include <vector>

#include "cbss/demixing.hpp"
#include "cbss/source_models.hpp"
#include "cbss/stft.hpp"

namespace cbss {

// consistent: the separated spectrogram is pushed through the consistency
// projection inside every step. plain: the projection is the identity.
enum class Variant { consistent, plain };

struct SolverConfig {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double alpha = 1.75;
  int iterations = 2000;
  Variant variant = Variant::consistent;
  // Rescale the observation so its operator norm is 1 before iterating
  // (the step sizes then satisfy mu1*mu2*||op||^2 <= 1 at the defaults).
  bool normalize_input = true;
  int log_every = 1;
};

struct SolverState {
  DemixStack w;
  Spectrogram y;
  int iteration = 0;
};

struct DiagnosticsRow {
  int iteration = 0;
  double objective = 0.0;
  double primal_change = 0.0;
  double consistency_residual = 0.0;
};

struct Diagnostics {
  std::vector<DiagnosticsRow> rows;
  void write_csv(std::ostream& os) const;
};

// Identity demixing stack, zero dual spectrogram.
SolverState init_state(const ObservationTensor& obs);

// One primal-dual step. The observation is used as given; callers wanting
// normalization scale it first (run() does).
SolverState pds_step(const SolverState& s, const ObservationTensor& obs, const SourceModel& model,
                     const SolverConfig& cfg, const WindowPair& win);

// Penalty of the (optionally projected) separated spectrogram plus the
// log-det barrier on the demixing stack.
double objective_value(const DemixStack& w, const ObservationTensor& obs, const SourceModel& model,
                       Variant variant, const WindowPair& win);

struct SolveResult {
  DemixStack demix;
  Diagnostics diagnostics;
};

// Full K-iteration solve. Throws DivergenceError if the state goes
// non-finite. Diagnostics rows are written at iteration 0, every log_every
// iterations, and at the final iteration; they describe the problem actually
// iterated (after normalization when enabled).
SolveResult run(const ObservationTensor& obs, const SourceModel& model, const SolverConfig& cfg,
                const WindowPair& win);

struct SeparationResult {
  TimeSignal sources;  // one channel per separated source, input length
  DemixStack demix;
  Diagnostics diagnostics;
};

// Pad, analyze, solve, apply the final stack to the unscaled observation,
// synthesize, trim. Output count equals the input channel count.
SeparationResult separate(const TimeSignal& mixture, const SourceModel& model,
                          const SolverConfig& cfg, const WindowPair& win);

}  // namespace cbss
