// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/bss_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbss/errors.hpp"

namespace cbss {

namespace {

double db_ratio(double num, double den) {
  if (num <= 0.0 && den <= 0.0) return 0.0;
  if (den <= 0.0) return kDbCap;
  if (num <= 0.0) return -kDbCap;
  return std::clamp(10.0 * std::log10(num / den), -kDbCap, kDbCap);
}

// b[(i,l)] = <delayed copy l of ref i, estimate>.
Eigen::VectorXd correlate(const std::vector<Eigen::VectorXd>& refs, int filter_len,
                          const Eigen::VectorXd& estimate) {
  const long n = estimate.size();
  Eigen::VectorXd b(static_cast<long>(refs.size()) * filter_len);
  for (std::size_t i = 0; i < refs.size(); ++i)
    for (int l = 0; l < filter_len; ++l)
      b(static_cast<long>(i) * filter_len + l) = refs[i].head(n - l).dot(estimate.tail(n - l));
  return b;
}

}  // namespace

ReferenceBasis::ReferenceBasis(std::vector<Eigen::VectorXd> refs, int filter_len)
    : refs_(std::move(refs)), filter_len_(filter_len) {
  if (refs_.empty()) throw DimensionError("reference basis: need at least one reference");
  const long n = refs_[0].size();
  if (n < 1) throw DimensionError("reference basis: references must be non-empty");
  for (const auto& r : refs_)
    if (r.size() != n) throw DimensionError("reference basis: references must share one length");
  if (filter_len_ < 1) throw ConfigError("reference basis: filter length must be >= 1");
  if (filter_len_ > n) throw ConfigError("reference basis: filter length exceeds the signal");

  const int N = count(), K = filter_len_;
  gram_.setZero(static_cast<long>(N) * K, static_cast<long>(N) * K);
  // For delays k >= l the inner product is the lag-(k-l) correlation, cut off
  // where the later copy runs past the signal end; prefix sums give every
  // cutoff of one lag in a single pass.
  std::vector<double> prefix(n);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int d = 0; d < K; ++d) {
        double acc = 0.0;
        for (long m = 0; m + d < n; ++m) {
          acc += refs_[i](m) * refs_[j](m + d);
          prefix[m] = acc;
        }
        for (int l = 0; l + d < K; ++l) {
          const int k = l + d;
          const double v = prefix[n - 1 - k];
          gram_(static_cast<long>(i) * K + k, static_cast<long>(j) * K + l) = v;
          gram_(static_cast<long>(j) * K + l, static_cast<long>(i) * K + k) = v;
        }
      }

  const Eigen::LDLT<Eigen::MatrixXd> raw(gram_);
  const auto pivots = raw.vectorD();
  regularized_ =
      raw.info() != Eigen::Success || !(pivots.minCoeff() > pivots.maxCoeff() * 1e-12);

  const double ridge = 1e-10 * gram_.trace();
  gram_.diagonal().array() += ridge;
  gram_ldlt_.compute(gram_);
  block_ldlt_.reserve(N);
  for (int i = 0; i < N; ++i)
    block_ldlt_.emplace_back(gram_.block(static_cast<long>(i) * K, static_cast<long>(i) * K, K, K)
                                 .eval());
}

Eigen::VectorXd ReferenceBasis::synth(const Eigen::VectorXd& coeffs) const {
  const long n = length();
  const int K = filter_len_;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < count(); ++i)
    for (int k = 0; k < K; ++k) {
      const double c = coeffs(static_cast<long>(i) * K + k);
      if (c != 0.0) x.segment(k, n - k) += c * refs_[i].head(n - k);
    }
  return x;
}

Eigen::VectorXd ReferenceBasis::solve_all(const Eigen::VectorXd& estimate) const {
  return gram_ldlt_.solve(correlate(refs_, filter_len_, estimate));
}

Eigen::VectorXd ReferenceBasis::project_all(const Eigen::VectorXd& estimate) const {
  if (estimate.size() != length())
    throw DimensionError("project: estimate length must match the references");
  return synth(solve_all(estimate));
}

Decomposition ReferenceBasis::decompose(const Eigen::VectorXd& estimate, int target_index) const {
  if (estimate.size() != length())
    throw DimensionError("decompose: estimate length must match the references");
  if (target_index < 0 || target_index >= count())
    throw DimensionError("decompose: target index out of range");

  const int K = filter_len_;
  const Eigen::VectorXd b = correlate(refs_, K, estimate);
  const Eigen::VectorXd all = synth(gram_ldlt_.solve(b));

  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(b.size());
  coeffs.segment(static_cast<long>(target_index) * K, K) =
      block_ldlt_[target_index].solve(b.segment(static_cast<long>(target_index) * K, K));

  Decomposition d;
  d.target = synth(coeffs);
  d.interference = all - d.target;
  d.artifact = estimate - all;
  d.regularized = regularized_;
  return d;
}

Decomposition decompose(const Eigen::VectorXd& estimate, const std::vector<Eigen::VectorXd>& refs,
                        int target_index, int filter_len) {
  return ReferenceBasis(refs, filter_len).decompose(estimate, target_index);
}

Metrics sdr_sir_sar(const Decomposition& d) {
  const double t = d.target.squaredNorm();
  const double i = d.interference.squaredNorm();
  const double a = d.artifact.squaredNorm();
  Metrics m;
  m.sdr_db = db_ratio(t, i + a);
  m.sir_db = db_ratio(t, i);
  m.sar_db = db_ratio((d.target + d.interference).squaredNorm(), a);
  return m;
}

std::vector<int> best_permutation_align(const std::vector<Eigen::VectorXd>& estimates,
                                        const ReferenceBasis& basis) {
  const int n = static_cast<int>(estimates.size());
  if (n == 0) throw DimensionError("alignment: need at least one estimate");
  if (n != basis.count()) throw DimensionError("alignment: need one estimate per reference");
  if (n > 4) throw ConfigError("alignment is exhaustive and capped at 4 estimates");

  Eigen::MatrixXd sir(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sir(i, j) = sdr_sir_sar(basis.decompose(estimates[i], j)).sir_db;

  std::vector<int> perm(n), best(n);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  double best_score = -std::numeric_limits<double>::infinity();
  do {
    double score = 0.0;
    for (int i = 0; i < n; ++i) score += sir(i, perm[i]);
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {

MetricsReport evaluate_on(const ReferenceBasis& basis,
                          const std::vector<Eigen::VectorXd>& estimates) {
  MetricsReport rep;
  rep.regularized = basis.regularized();
  rep.assignment = best_permutation_align(estimates, basis);
  rep.per_source.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i)
    rep.per_source.push_back(sdr_sir_sar(basis.decompose(estimates[i], rep.assignment[i])));
  return rep;
}

}  // namespace

MetricsReport evaluate(const std::vector<Eigen::VectorXd>& estimates,
                       const std::vector<Eigen::VectorXd>& refs, int filter_len) {
  if (estimates.size() != refs.size())
    throw DimensionError("evaluate: need one estimate per reference");
  return evaluate_on(ReferenceBasis(refs, filter_len), estimates);
}

MetricsReport evaluate_with_baseline(const std::vector<Eigen::VectorXd>& estimates,
                                     const TimeSignal& mixture,
                                     const std::vector<Eigen::VectorXd>& refs, int filter_len) {
  if (estimates.size() != refs.size())
    throw DimensionError("evaluate: need one estimate per reference");
  if (mixture.channels() < 1) throw DimensionError("evaluate: mixture has no channels");

  const ReferenceBasis basis(refs, filter_len);
  if (mixture.length() != basis.length())
    throw DimensionError("evaluate: mixture length must match the references");

  MetricsReport rep = evaluate_on(basis, estimates);
  rep.mixture_baseline.reserve(basis.count());
  for (int j = 0; j < basis.count(); ++j) {
    const int channel = std::min<int>(j, mixture.channels() - 1);
    const Eigen::VectorXd x = mixture.samples.row(channel).transpose();
    rep.mixture_baseline.push_back(sdr_sir_sar(basis.decompose(x, j)));
  }
  rep.improvement.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const Metrics& own = rep.per_source[i];
    const Metrics& base = rep.mixture_baseline[rep.assignment[i]];
    rep.improvement.push_back(
        {own.sdr_db - base.sdr_db, own.sir_db - base.sir_db, own.sar_db - base.sar_db});
  }
  return rep;
}

std::vector<Eigen::VectorXd> channels_of(const TimeSignal& x) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(x.channels());
  for (int m = 0; m < x.channels(); ++m) out.push_back(x.channel(m));
  return out;
}

}  // namespace cbss
