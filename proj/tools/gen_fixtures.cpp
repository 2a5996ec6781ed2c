// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Regenerates the bundled speech-like fixtures under data/.

#include <filesystem>
#include <iostream>

#include "cbss/mixsim.hpp"
#include "cbss/wav.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);

  const double rate = 16000.0;
  const long n = 3 * 16000;
  const struct {
    const char* name;
    std::uint64_t seed;
  } fixtures[] = {{"speech_a.wav", cbss::kFixtureSeedA}, {"speech_b.wav", cbss::kFixtureSeedB}};
  for (const auto& f : fixtures) {
    const Eigen::VectorXd s = cbss::speechlike(f.seed, n, rate);
    cbss::write_wav(dir / f.name, cbss::TimeSignal::from_mono(s, rate));
    std::cout << "wrote " << (dir / f.name).string() << "\n";
  }
  return 0;
}
