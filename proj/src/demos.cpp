// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/demos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cbss/bss_eval.hpp"
#include "cbss/errors.hpp"
#include "cbss/rng.hpp"

namespace cbss {

Spectrogram make_exclusive(const Spectrogram& stack) {
  Spectrogram out = stack.like_zeros();
  for (int t = 0; t < stack.frames; ++t) {
    for (int f = 0; f < stack.bins; ++f) {
      int best = 0;
      double best_mag = std::abs(stack.at(0, t, f));
      for (int m = 1; m < stack.channels; ++m) {
        const double mag = std::abs(stack.at(m, t, f));
        if (mag > best_mag) {
          best = m;
          best_mag = mag;
        }
      }
      out.at(best, t, f) = stack.at(best, t, f);
    }
  }
  return out;
}

double leakage_fraction(const std::vector<Eigen::VectorXd>& outputs,
                        const std::vector<Eigen::VectorXd>& refs, int filter_len) {
  if (outputs.size() != refs.size())
    throw ConfigError("leakage_fraction: output/reference counts differ");

  double total = 0.0;
  for (const auto& o : outputs) total += o.squaredNorm();
  if (total <= 0.0) return 0.0;

  const ReferenceBasis basis(refs, filter_len);
  const int n = static_cast<int>(outputs.size());

  // Residual energy of each output against each single-reference span.
  Eigen::MatrixXd residual(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Decomposition d = basis.decompose(outputs[i], j);
      residual(i, j) = (outputs[i] - d.target).squaredNorm();
    }

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double leak = 0.0;
    for (int i = 0; i < n; ++i) leak += residual(i, perm[i]);
    best = std::min(best, leak);
  } while (std::next_permutation(perm.begin(), perm.end()));

  return best / total;
}

namespace {

double fixed_point_gap(const Spectrogram& proj, const Spectrogram& proj2) {
  const double denom = proj.norm();
  return denom > 0.0 ? distance(proj2, proj) / denom : 0.0;
}

}  // namespace

ConsistencyDemo run_consistency_demo(const Eigen::VectorXd& speech, double sample_rate,
                                     const WindowPair& win, double dropout_rate,
                                     std::uint64_t seed) {
  if (speech.size() < win.fft_size()) throw DimensionError("run_consistency_demo: signal too short");
  const Spectrogram base =
      stft(TimeSignal::from_mono(speech, sample_rate).padded_to_multiple(win.hop), win);

  ConsistencyDemo d;

  // A handful of isolated unit bins: maximally non-smooth along frequency.
  d.pulse = base.like_zeros();
  Rng rng(seed, "pulse");
  const int count = 12;
  for (int i = 0; i < count; ++i) {
    const int t = rng.uniform_int(0, d.pulse.frames - 1);
    const int f = rng.uniform_int(0, d.pulse.bins - 1);
    d.pulse.at(0, t, f) = cdouble(1.0, 0.0);
  }
  d.pulse_inconsistency = consistency_residual(d.pulse, win);
  d.pulse_proj = project_consistent(d.pulse, win);
  d.pulse_proj2 = project_consistent(d.pulse_proj, win);
  d.pulse_fixed_point = fixed_point_gap(d.pulse_proj, d.pulse_proj2);

  d.dropped = dropout_rate > 0.0 ? dropout(base, dropout_rate, seed) : base;
  d.dropped_inconsistency = consistency_residual(d.dropped, win);
  d.dropped_proj = project_consistent(d.dropped, win);
  d.dropped_proj2 = project_consistent(d.dropped_proj, win);
  d.dropped_fixed_point = fixed_point_gap(d.dropped_proj, d.dropped_proj2);

  return d;
}

PermutationDemo run_permutation_demo(const Eigen::VectorXd& source_a,
                                     const Eigen::VectorXd& source_b, double sample_rate,
                                     const WindowPair& win, std::uint64_t seed, int filter_len) {
  if (source_a.size() != source_b.size())
    throw DimensionError("run_permutation_demo: source lengths differ");
  if (source_a.size() < win.fft_size())
    throw DimensionError("run_permutation_demo: sources too short");

  TimeSignal pair;
  pair.sample_rate = sample_rate;
  pair.samples.resize(2, source_a.size());
  pair.samples.row(0) = source_a.transpose();
  pair.samples.row(1) = source_b.transpose();

  PermutationDemo d;
  d.exclusive = make_exclusive(stft(pair.padded_to_multiple(win.hop), win));

  const PermutationPlan plan = PermutationPlan::random(seed, 2, d.exclusive.bins);
  d.scrambled = scramble_permutation(d.exclusive, plan);
  d.projected = project_consistent(d.scrambled, win);

  // References: the exclusive stack heard in the time domain.
  const std::vector<Eigen::VectorXd> refs = channels_of(istft(d.exclusive, win));
  const auto out_id = channels_of(istft(project_consistent(d.exclusive, win), win));
  const auto out_scr = channels_of(istft(d.projected, win));
  d.leakage_identity = leakage_fraction(out_id, refs, filter_len);
  d.leakage_scrambled = leakage_fraction(out_scr, refs, filter_len);
  return d;
}

}  // namespace cbss
