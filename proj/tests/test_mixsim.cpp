// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cbss/mixsim.hpp"
#include "cbss/stft.hpp"

using namespace cbss;

namespace {

double condition_number(const Eigen::MatrixXd& a) {
  const auto sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  return sv(0) / sv(sv.size() - 1);
}

// Energy of a mono signal inside [lo, hi) Hz, measured on a tight grid.
double band_energy(const Eigen::VectorXd& x, double rate, double lo, double hi) {
  const WindowPair win = design_tight_window(WindowShape::hann, 512, 256);
  TimeSignal sig = TimeSignal::from_mono(x, rate).padded_to_multiple(win.hop);
  const Spectrogram s = stft(sig, win);
  double e = 0.0;
  for (int t = 0; t < s.frames; ++t)
    for (int f = 0; f < s.bins; ++f) {
      const double hz = f * rate / s.fft_size;
      if (hz >= lo && hz < hi) e += std::norm(s.at(0, t, f));
    }
  return e;
}

}  // namespace

TEST_CASE("random mixing matrices respect the condition cap") {
  Rng rng(101, "mixing-matrix");
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd a = random_mixing_matrix(rng, 3, 2, 10.0);
    CHECK(a.rows() == 3);
    CHECK(a.cols() == 2);
    CHECK(condition_number(a) <= 10.0);
  }

  SUBCASE("identical generator state reproduces the draw") {
    Rng r1(7, "mixing-matrix"), r2(7, "mixing-matrix");
    CHECK(random_mixing_matrix(r1, 2, 2) == random_mixing_matrix(r2, 2, 2));
  }

  SUBCASE("an impossible cap is rejected rather than spun on") {
    Rng r(7, "mixing-matrix");
    CHECK_THROWS_AS(random_mixing_matrix(r, 2, 2, 1.0 + 1e-9), ConfigError);
  }
}

TEST_CASE("synthetic room responses decay and carry unit energy") {
  Rng rng(102, "rir");
  const Eigen::VectorXd r = synth_rir(rng, 256, 32.0);
  CHECK(r.size() == 256);
  CHECK(r.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r(0) > 0.0);
  const double head = r.head(64).squaredNorm();
  CHECK(head > 1.0 - head);  // early taps dominate at this decay

  SUBCASE("infinite decay leaves a flat noise response") {
    const Eigen::VectorXd flat =
        synth_rir(rng, 512, std::numeric_limits<double>::infinity());
    CHECK(flat.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const double front = flat.head(256).squaredNorm();
    CHECK(front > 0.25);
    CHECK(front < 0.75);
  }
}

TEST_CASE("instantaneous mixing is the matrix product") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  Eigen::MatrixXd s(2, 3);
  s << 1.0, 0.0, -1.0, 2.0, 1.0, 0.5;
  const TimeSignal mixed = mix_instantaneous(a, TimeSignal(s, 16000.0));
  CHECK((mixed.samples - a * s).norm() == 0.0);
  CHECK(mixed.sample_rate == 16000.0);

  SUBCASE("singular matrices are rejected") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(mix_instantaneous(bad, TimeSignal(s, 16000.0)), ConfigError);
  }
  SUBCASE("channel count must match the matrix") {
    CHECK_THROWS_AS(mix_instantaneous(a, TimeSignal(Eigen::MatrixXd::Ones(3, 4), 16000.0)),
                    DimensionError);
  }
}

TEST_CASE("convolutive mixing is truncated linear convolution") {
  Eigen::MatrixXd s(1, 4);
  s << 1.0, 2.0, 0.0, -1.0;
  Eigen::VectorXd h(2);
  h << 0.5, 0.25;
  const TimeSignal mixed = mix_convolutive({{h}}, TimeSignal(s, 8000.0));
  Eigen::MatrixXd expect(1, 4);
  expect << 0.5, 1.25, 0.5, -0.5;
  CHECK((mixed.samples - expect).norm() < 1e-15);

  SUBCASE("unit impulses route and delay") {
    Eigen::VectorXd now = Eigen::VectorXd::Zero(3), later = Eigen::VectorXd::Zero(3);
    now(0) = 1.0;
    later(1) = 1.0;
    Eigen::MatrixXd src(2, 5);
    src << 1, 2, 3, 4, 5, 10, 20, 30, 40, 50;
    const TimeSignal y = mix_convolutive({{now, later}, {later, now}}, TimeSignal(src, 8000.0));
    Eigen::MatrixXd want(2, 5);
    want << 1 + 0, 2 + 10, 3 + 20, 4 + 30, 5 + 40,  //
        0 + 10, 1 + 20, 2 + 30, 3 + 40, 4 + 50;
    CHECK((y.samples - want).norm() == 0.0);
  }
  SUBCASE("filter grid must match the channel counts") {
    CHECK_THROWS_AS(mix_convolutive({{h}}, TimeSignal(Eigen::MatrixXd::Ones(2, 8), 8000.0)),
                    DimensionError);
  }
}

TEST_CASE("mix specs are reproducible and dispatch by kind") {
  const MixSpec inst = make_instantaneous_spec(42, 2, 2);
  CHECK(inst.kind == MixKind::instantaneous);
  CHECK(inst.matrix == make_instantaneous_spec(42, 2, 2).matrix);
  CHECK(condition_number(inst.matrix) <= 10.0);

  const MixSpec conv = make_convolutive_spec(42, 2, 2, 64, 16.0);
  CHECK(conv.kind == MixKind::convolutive);
  REQUIRE(conv.rirs.size() == 2);
  REQUIRE(conv.rirs[0].size() == 2);
  CHECK(conv.rirs[1][0] == make_convolutive_spec(42, 2, 2, 64, 16.0).rirs[1][0]);
  CHECK(conv.rirs[0][0].size() == 64);

  Eigen::MatrixXd s = Eigen::MatrixXd::Random(2, 32);
  const TimeSignal src(s, 16000.0);
  CHECK((mix(inst, src).samples - mix_instantaneous(inst.matrix, src).samples).norm() == 0.0);
  CHECK((mix(conv, src).samples - mix_convolutive(conv.rirs, src).samples).norm() == 0.0);
}

TEST_CASE("permutation plans shuffle bins and invert exactly") {
  const PermutationPlan id = PermutationPlan::identity(3, 5);
  CHECK(id.bins() == 5);
  CHECK(id.channels() == 3);
  for (const auto& p : id.perm) CHECK(p == std::vector<int>{0, 1, 2});

  const PermutationPlan plan = PermutationPlan::random(9, 3, 64);
  CHECK(plan.bins() == 64);
  bool any_moved = false;
  for (const auto& p : plan.perm) {
    std::vector<int> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2});  // every bin holds a permutation
    if (p != std::vector<int>{0, 1, 2}) any_moved = true;
  }
  CHECK(any_moved);
  CHECK(PermutationPlan::random(9, 3, 64).perm == plan.perm);
  CHECK(PermutationPlan::random(10, 3, 64).perm != plan.perm);

  SUBCASE("scramble followed by the inverse plan restores the input") {
    Spectrogram s = Spectrogram::zeros(3, 4, 64, 126, 63, 16000.0);
    Rng rng(11, "fill");
    for (auto& c : s.data) c = cdouble(rng.normal(), rng.normal());
    const Spectrogram mixed_up = scramble_permutation(s, plan);
    CHECK(distance(mixed_up, s) > 0.0);
    CHECK(distance(scramble_permutation(mixed_up, plan.inverse()), s) == 0.0);
  }
  SUBCASE("per-bin routing matches the table") {
    Spectrogram s = Spectrogram::zeros(2, 1, 2, 2, 1, 16000.0);
    s.at(0, 0, 0) = 1.0;
    s.at(1, 0, 0) = 2.0;
    s.at(0, 0, 1) = 3.0;
    s.at(1, 0, 1) = 4.0;
    PermutationPlan swap_hi;
    swap_hi.perm = {{0, 1}, {1, 0}};
    const Spectrogram y = scramble_permutation(s, swap_hi);
    CHECK(y.at(0, 0, 0) == cdouble(1.0, 0.0));
    CHECK(y.at(0, 0, 1) == cdouble(4.0, 0.0));
    CHECK(y.at(1, 0, 1) == cdouble(3.0, 0.0));
  }
  SUBCASE("plan shape must match the spectrogram") {
    Spectrogram s = Spectrogram::zeros(3, 4, 65, 128, 64, 16000.0);
    CHECK_THROWS_AS(scramble_permutation(s, plan), DimensionError);
  }
}

TEST_CASE("dropout zeroes entries independently at the given rate") {
  Spectrogram s = Spectrogram::zeros(2, 50, 65, 128, 64, 16000.0);
  Rng rng(12, "fill");
  for (auto& c : s.data) c = cdouble(rng.normal(), rng.normal());

  CHECK(distance(dropout(s, 0.0, 5), s) == 0.0);
  CHECK(dropout(s, 1.0, 5).norm() == 0.0);

  const Spectrogram d = dropout(s, 0.3, 5);
  CHECK(distance(d, dropout(s, 0.3, 5)) == 0.0);
  CHECK(distance(d, dropout(s, 0.3, 6)) > 0.0);

  long zeroed = 0;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const bool kept = d.data[i] == s.data[i];
    const bool dropped = d.data[i] == cdouble(0.0, 0.0);
    CHECK((kept || dropped));
    if (dropped) ++zeroed;
  }
  const double n = static_cast<double>(s.data.size());
  const double sigma = std::sqrt(n * 0.3 * 0.7);
  CHECK(std::abs(zeroed - 0.3 * n) < 5.0 * sigma);
}

TEST_CASE("speech-like fixtures have usable structure") {
  const double rate = 16000.0;
  const long n = 3 * 16000;
  const Eigen::VectorXd a = speechlike(kFixtureSeedA, n, rate);
  const Eigen::VectorXd b = speechlike(kFixtureSeedB, n, rate);

  CHECK(a.size() == n);
  CHECK(a.cwiseAbs().maxCoeff() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((a - speechlike(kFixtureSeedA, n, rate)).norm() == 0.0);
  CHECK((a - b).norm() > 0.0);

  for (const auto* x : {&a, &b}) {
    // Syllabic structure: quiet stretches exist, and loud frames carry most
    // of the energy.
    long quiet = 0;
    for (long i = 0; i < n; ++i)
      if (std::abs((*x)(i)) < 1e-4) ++quiet;
    CHECK(quiet > n / 50);

    const double low = band_energy(*x, rate, 50.0, 1000.0);
    const double mid = band_energy(*x, rate, 1000.0, 3000.0);
    const double high = band_energy(*x, rate, 3000.0, 6000.0);
    CHECK(low > 0.0);
    CHECK(mid > 0.005 * low);   // spectrum reaches well past the fundamental
    CHECK(high > 0.001 * low);  // and keeps energy in the upper bands
  }

  SUBCASE("frame energies are heavy-tailed") {
    const WindowPair win = design_tight_window(WindowShape::hann, 1024, 512);
    const Spectrogram s = stft(TimeSignal::from_mono(a, rate).padded_to_multiple(512), win);
    std::vector<double> frame_energy(s.frames, 0.0);
    for (int t = 0; t < s.frames; ++t)
      for (int f = 0; f < s.bins; ++f) frame_energy[t] += std::norm(s.at(0, t, f));
    std::sort(frame_energy.begin(), frame_energy.end(), std::greater<>());
    const double total = std::accumulate(frame_energy.begin(), frame_energy.end(), 0.0);
    const auto top = frame_energy.begin() + s.frames / 5;
    const double top_share = std::accumulate(frame_energy.begin(), top, 0.0) / total;
    CHECK(top_share > 0.5);  // top fifth of frames holds most of the energy
  }
}
