// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/demixing.hpp"

#include <cmath>

namespace cbss {

namespace {

using BinView = Eigen::Map<const Eigen::MatrixXcd, Eigen::Unaligned,
                           Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

BinView bin_view(const Spectrogram& s, int f) {
  const long T = s.frames, B = s.bins;
  return BinView(s.data.data() + f, T, s.channels,
                 Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(T * B, B));
}

void check_stack_obs(const DemixStack& w, const ObservationTensor& obs, const char* where) {
  if (w.bins() != obs.bins())
    throw DimensionError(std::string(where) + ": stack bin count does not match observation");
  if (w.channels() != obs.channels())
    throw DimensionError(std::string(where) + ": stack channel count does not match observation");
}

}  // namespace

double stack_distance(const DemixStack& a, const DemixStack& b) {
  if (a.bins() != b.bins() || a.channels() != b.channels())
    throw DimensionError("stack_distance: stacks differ in shape");
  double s = 0.0;
  for (int f = 0; f < a.bins(); ++f) s += (a.mats[f] - b.mats[f]).squaredNorm();
  return std::sqrt(s);
}

DemixStack& stack_add_scaled(DemixStack& a, const DemixStack& b, double s) {
  if (a.bins() != b.bins() || a.channels() != b.channels())
    throw DimensionError("stack_add_scaled: stacks differ in shape");
  for (int f = 0; f < a.bins(); ++f) a.mats[f] += s * b.mats[f];
  return a;
}

DemixStack& stack_scale(DemixStack& a, double s) {
  for (auto& m : a.mats) m *= s;
  return a;
}

Eigen::VectorXcd vectorize(const DemixStack& w) {
  const int M = w.channels(), B = w.bins();
  Eigen::VectorXcd v(static_cast<long>(B) * M * M);
  long i = 0;
  for (int f = 0; f < B; ++f)
    for (int n = 0; n < M; ++n)
      for (int m = 0; m < M; ++m) v[i++] = w.mats[f](n, m);
  return v;
}

DemixStack devectorize(const Eigen::VectorXcd& v, int channels, int bins) {
  if (v.size() != static_cast<long>(bins) * channels * channels)
    throw DimensionError("devectorize: vector length does not match the stack shape");
  DemixStack w;
  w.mats.assign(bins, Eigen::MatrixXcd(channels, channels));
  long i = 0;
  for (int f = 0; f < bins; ++f)
    for (int n = 0; n < channels; ++n)
      for (int m = 0; m < channels; ++m) w.mats[f](n, m) = v[i++];
  return w;
}

Spectrogram apply_demix(const DemixStack& w, const ObservationTensor& obs) {
  check_stack_obs(w, obs, "apply_demix");
  const int M = obs.channels(), T = obs.frames(), B = obs.bins();
  Spectrogram out = obs.spec().like_zeros();
  Eigen::MatrixXcd y(T, M);
  for (int f = 0; f < B; ++f) {
    y.noalias() = obs.chi(f) * w.mats[f].transpose();
    for (int n = 0; n < M; ++n)
      for (int t = 0; t < T; ++t) out.at(n, t, f) = y(t, n);
  }
  return out;
}

DemixStack adjoint_correlate(const ObservationTensor& obs, const Spectrogram& y) {
  if (!y.same_grid(obs.spec()))
    throw DimensionError("adjoint_correlate: spectrogram grid does not match observation");
  const int B = obs.bins();
  DemixStack g;
  g.mats.resize(B);
  for (int f = 0; f < B; ++f)
    g.mats[f] = (obs.chi(f).adjoint() * bin_view(y, f)).transpose();
  return g;
}

double logdet_penalty(const DemixStack& w) {
  const int B = static_cast<int>(w.mats.size());
  double total = 0.0;
  for (int f = 0; f < B; ++f) {
    const auto& m = w.mats[f];
    if (!m.allFinite()) return kSingularSentinel;
    // Interior bins of the one-sided stack stand for a conjugate pair of
    // full-spectrum matrices with equal singular values.
    const double weight = (f == 0 || f == B - 1) ? 1.0 : 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.adjoint() * m);
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double ev = es.eigenvalues()[i];
      if (!(ev > 1e-300)) return kSingularSentinel;
      total -= weight * 0.5 * std::log(ev);
    }
  }
  return total;
}

DemixStack prox_logdet(const DemixStack& w, double mu) {
  if (!(mu > 0.0)) throw ConfigError("prox_logdet: mu must be positive");
  DemixStack out;
  out.mats.resize(w.bins());
  for (int f = 0; f < w.bins(); ++f) {
    const Eigen::MatrixXcd& z = w.mats[f];
    const int M = static_cast<int>(z.rows());

    // Shared-singular-vector shrinkage. The eigenvectors of z^H z are the
    // right singular vectors, so z V diag(s'/s) V^H rescales each singular
    // value in place; this avoids a full SVD on the hot path but needs
    // nonsingular z.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(z.adjoint() * z);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double smax = std::sqrt(ev[M - 1]);
    if (smax > 0.0 && std::sqrt(ev[0]) > 1e-9 * smax) {
      Eigen::VectorXd ratio(M);
      for (int i = 0; i < M; ++i) {
        const double s = std::sqrt(ev[i]);
        ratio[i] = (s + std::sqrt(s * s + 4.0 * mu)) / (2.0 * s);
      }
      out.mats[f] = z * es.eigenvectors() * ratio.asDiagonal() *
                    es.eigenvectors().adjoint();
      continue;
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(z, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd sp(M);
    for (int i = 0; i < M; ++i) {
      const double s = svd.singularValues()[i];
      sp[i] = (s + std::sqrt(s * s + 4.0 * mu)) / 2.0;
    }
    out.mats[f] = svd.matrixU() * sp.asDiagonal() * svd.matrixV().adjoint();
  }
  return out;
}

double operator_norm(const ObservationTensor& obs) {
  double worst = 0.0;
  for (int f = 0; f < obs.bins(); ++f) {
    const Eigen::MatrixXcd chi = obs.chi(f);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(chi.adjoint() * chi);
    worst = std::max(worst, es.eigenvalues().cwiseMax(0.0).maxCoeff());
  }
  return std::sqrt(worst);
}

}  // namespace cbss
