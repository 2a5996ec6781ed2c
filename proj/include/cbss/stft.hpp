// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>

#include "cbss/spectrogram.hpp"

namespace cbss {

enum class WindowShape { hann, rectangular };

// Analysis/synthesis window pair on a circular hop grid. The pair satisfies
// perfect reconstruction when the periodized sum of analysis*synthesis over
// hop shifts equals 1/fft_size at every tap.
struct WindowPair {
  Eigen::VectorXd analysis;
  Eigen::VectorXd synthesis;
  int hop = 0;

  int fft_size() const { return static_cast<int>(analysis.size()); }
  bool is_tight() const;

  // Largest deviation of the reconstruction normalizer from its target.
  double pr_residual() const;
  void validate() const;  // throws ConfigError when the pair cannot reconstruct

  // Analysis and synthesis roles exchanged (the adjoint projection ordering).
  WindowPair swapped() const {
    WindowPair w;
    w.analysis = synthesis;
    w.synthesis = analysis;
    w.hop = hop;
    return w;
  }
};

// Self-dual window: base shape divided by the square root of F times the
// periodized sum of its squared hop shifts, so analysis is an exact isometry
// (explicit analysis matrix PHI satisfies PHI^H PHI = I).
WindowPair design_tight_window(WindowShape shape, int fft_size, int hop);

// Canonical dual pair: analysis is the raw base window, synthesis its dual.
// Not tight unless the base already is; used to exercise asymmetric pairs.
WindowPair design_dual_pair(WindowShape shape, int fft_size, int hop);

// Circular analysis: frame t covers samples (hop*t + n) mod L, n in [0, F).
// Signal length must be a multiple of the hop (pad first); frames = L / hop.
Spectrogram stft(const TimeSignal& x, const WindowPair& win);

// Adjoint-style synthesis with the synthesis window: windowed inverse DFT of
// each frame, circular overlap-add. Imaginary parts at bins 0 and F/2 are
// discarded (they have no two-sided counterpart).
TimeSignal istft(const Spectrogram& g, const WindowPair& win);

// stft(istft(g)): orthogonal projection onto spectrograms of real signals
// for tight pairs. project_consistent_adjoint uses the swapped window roles.
Spectrogram project_consistent(const Spectrogram& g, const WindowPair& win);
Spectrogram project_consistent_adjoint(const Spectrogram& g, const WindowPair& win);

// ||g - project(g)|| / max(||g||, tiny); 0 iff g is consistent.
double consistency_residual(const Spectrogram& g, const WindowPair& win);

}  // namespace cbss
