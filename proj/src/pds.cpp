// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/pds.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <utility>

#include "cbss/errors.hpp"

namespace cbss {

namespace {

DemixStack lincomb(double a, const DemixStack& x, double b, const DemixStack& y) {
  DemixStack out = x;
  stack_scale(out, a);
  stack_add_scaled(out, y, b);
  return out;
}

Spectrogram lincomb(double a, const Spectrogram& x, double b, const Spectrogram& y) {
  Spectrogram out = x;
  scale_inplace(out, a);
  add_scaled(out, y, b);
  return out;
}

void check_config(const SolverConfig& cfg) {
  if (cfg.iterations < 0) throw ConfigError("solver: iterations must be >= 0");
  if (cfg.mu1 <= 0.0 || cfg.mu2 <= 0.0) throw ConfigError("solver: step sizes must be positive");
  if (cfg.alpha <= 0.0 || cfg.alpha >= 2.0)
    throw ConfigError("solver: relaxation must lie in (0, 2)");
}

}  // namespace

void Diagnostics::write_csv(std::ostream& os) const {
  os << "iteration,objective,primal_change,consistency_residual\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.iteration, r.objective,
                  r.primal_change, r.consistency_residual);
    os << buf;
  }
}

SolverState init_state(const ObservationTensor& obs) {
  SolverState s;
  s.w = DemixStack::identity(obs.channels(), obs.bins());
  s.y = obs.spec().like_zeros();
  s.iteration = 0;
  return s;
}

SolverState pds_step(const SolverState& s, const ObservationTensor& obs, const SourceModel& model,
                     const SolverConfig& cfg, const WindowPair& win) {
  const bool consistent = cfg.variant == Variant::consistent;

  // Primal half: pull the dual back through the projection and the mixing
  // operator, then apply the log-det prox.
  const Spectrogram fed = consistent ? project_consistent_adjoint(s.y, win) : s.y;
  DemixStack shifted = s.w;
  stack_add_scaled(shifted, adjoint_correlate(obs, fed), -cfg.mu1 * cfg.mu2);
  const DemixStack w_prox = prox_logdet(shifted, cfg.mu1);

  // Dual half: separate with the extrapolated stack, accumulate, and strip
  // the part the penalty prox keeps.
  Spectrogram sep = apply_demix(lincomb(2.0, w_prox, -1.0, s.w), obs);
  if (consistent) sep = project_consistent(sep, win);
  Spectrogram z = std::move(sep);
  add_scaled(z, s.y, 1.0);
  Spectrogram y_prox = z;
  add_scaled(y_prox, model.prox(z, cfg.mu2), -1.0);

  SolverState next;
  next.w = lincomb(cfg.alpha, w_prox, 1.0 - cfg.alpha, s.w);
  next.y = lincomb(cfg.alpha, y_prox, 1.0 - cfg.alpha, s.y);
  next.iteration = s.iteration + 1;
  return next;
}

double objective_value(const DemixStack& w, const ObservationTensor& obs, const SourceModel& model,
                       Variant variant, const WindowPair& win) {
  Spectrogram sep = apply_demix(w, obs);
  if (variant == Variant::consistent) sep = project_consistent(sep, win);
  return model.value(sep) + logdet_penalty(w);
}

SolveResult run(const ObservationTensor& obs, const SourceModel& model, const SolverConfig& cfg,
                const WindowPair& win) {
  check_config(cfg);
  win.validate();

  ObservationTensor work(obs.spec());
  if (cfg.normalize_input) {
    const double nu = operator_norm(work);
    if (nu > 0.0 && std::isfinite(nu)) work.scale(1.0 / nu);
  }

  SolverState s = init_state(work);
  Diagnostics diag;
  const auto log_row = [&](double primal_change) {
    const Spectrogram sep = apply_demix(s.w, work);
    const Spectrogram proj = project_consistent(sep, win);
    DiagnosticsRow r;
    r.iteration = s.iteration;
    r.objective = model.value(cfg.variant == Variant::consistent ? proj : sep) +
                  logdet_penalty(s.w);
    r.primal_change = primal_change;
    r.consistency_residual = distance(sep, proj) / std::max(sep.norm(), 1e-300);
    diag.rows.push_back(r);
  };

  log_row(0.0);
  const int every = cfg.log_every > 0 ? cfg.log_every : cfg.iterations;
  DemixStack prev = s.w;
  for (int k = 1; k <= cfg.iterations; ++k) {
    prev = s.w;
    s = pds_step(s, work, model, cfg, win);
    if (!s.w.all_finite() || !s.y.all_finite())
      throw DivergenceError("solver state went non-finite", s.iteration);
    if (k % every == 0 || k == cfg.iterations) log_row(stack_distance(s.w, prev));
  }
  return {std::move(s.w), std::move(diag)};
}

SeparationResult separate(const TimeSignal& mixture, const SourceModel& model,
                          const SolverConfig& cfg, const WindowPair& win) {
  win.validate();
  if (mixture.length() < 1) throw DimensionError("separate: empty input");

  const long len = mixture.length();
  long padded_len = ((len + win.hop - 1) / win.hop) * win.hop;
  if (padded_len < win.fft_size()) padded_len = win.fft_size();
  TimeSignal padded;
  padded.sample_rate = mixture.sample_rate;
  padded.samples = Eigen::MatrixXd::Zero(mixture.channels(), padded_len);
  padded.samples.leftCols(len) = mixture.samples;

  const ObservationTensor obs(stft(padded, win));
  SolveResult solved = run(obs, model, cfg, win);
  const TimeSignal full = istft(apply_demix(solved.demix, obs), win);

  SeparationResult out;
  out.sources.sample_rate = mixture.sample_rate;
  out.sources.samples = full.samples.leftCols(len);
  out.demix = std::move(solved.demix);
  out.diagnostics = std::move(solved.diagnostics);
  return out;
}

}  // namespace cbss
