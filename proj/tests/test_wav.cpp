// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cbss/errors.hpp"
#include "cbss/wav.hpp"
#include "doctest.h"

using namespace cbss;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cbss_wav_test_" + name);
}

std::vector<unsigned char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void push_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xff));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

void push_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void push_tag(std::vector<unsigned char>& b, const char* tag) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(tag[i]));
}

void push_i16(std::vector<unsigned char>& b, std::int16_t v) {
  push_u16(b, static_cast<std::uint16_t>(v));
}

// Minimal PCM16 file: optional leading odd-sized junk chunk (exercises the
// even-padding rule), fmt, then interleaved frames.
std::vector<unsigned char> pcm16_file(int channels, std::uint32_t rate,
                                      const std::vector<std::int16_t>& interleaved,
                                      bool with_junk = true) {
  std::vector<unsigned char> body;
  if (with_junk) {
    push_tag(body, "junk");
    push_u32(body, 3);
    body.push_back('x');
    body.push_back('y');
    body.push_back('z');
    body.push_back(0);  // pad to even
  }
  push_tag(body, "fmt ");
  push_u32(body, 16);
  push_u16(body, 1);  // integer PCM
  push_u16(body, static_cast<std::uint16_t>(channels));
  push_u32(body, rate);
  push_u32(body, rate * channels * 2);
  push_u16(body, static_cast<std::uint16_t>(channels * 2));
  push_u16(body, 16);
  push_tag(body, "data");
  push_u32(body, static_cast<std::uint32_t>(interleaved.size() * 2));
  for (std::int16_t v : interleaved) push_i16(body, v);
  if ((interleaved.size() * 2) % 2 == 1) body.push_back(0);

  std::vector<unsigned char> file;
  push_tag(file, "RIFF");
  push_u32(file, static_cast<std::uint32_t>(4 + body.size()));
  push_tag(file, "WAVE");
  file.insert(file.end(), body.begin(), body.end());
  return file;
}

std::filesystem::path dump(const std::string& name, const std::vector<unsigned char>& bytes) {
  const auto p = temp_path(name);
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
  REQUIRE(out.good());
  return p;
}

}  // namespace

TEST_CASE("float32 write/read round trip is exact") {
  const int channels = 3;
  const long n = 41;
  TimeSignal x;
  x.sample_rate = 16000.0;
  x.samples.resize(channels, n);
  for (int c = 0; c < channels; ++c)
    for (long i = 0; i < n; ++i)
      x.samples(c, i) = static_cast<double>(static_cast<float>(std::sin(0.1 * i + c) * 0.7));

  const auto p = temp_path("roundtrip.wav");
  write_wav(p, x);
  const TimeSignal y = read_wav(p);

  CHECK(y.channels() == channels);
  CHECK(y.length() == n);
  CHECK(y.sample_rate == 16000.0);
  CHECK((y.samples - x.samples).cwiseAbs().maxCoeff() == 0.0);

  const auto p2 = temp_path("roundtrip2.wav");
  write_wav(p2, x);
  CHECK(slurp(p) == slurp(p2));

  std::filesystem::remove(p);
  std::filesystem::remove(p2);
}

TEST_CASE("pcm16 decodes with division by 32768") {
  // Two channels, three frames, interleaved L R L R ...
  const std::vector<std::int16_t> frames = {-32768, 16384, 32767, -16384, 0, 257};
  const auto p = dump("pcm16.wav", pcm16_file(2, 8000, frames));
  const TimeSignal x = read_wav(p);

  REQUIRE(x.channels() == 2);
  REQUIRE(x.length() == 3);
  CHECK(x.sample_rate == 8000.0);
  CHECK(x.samples(0, 0) == -1.0);
  CHECK(x.samples(1, 0) == 16384.0 / 32768.0);
  CHECK(x.samples(0, 1) == 32767.0 / 32768.0);
  CHECK(x.samples(1, 1) == -16384.0 / 32768.0);
  CHECK(x.samples(0, 2) == 0.0);
  CHECK(x.samples(1, 2) == 257.0 / 32768.0);

  std::filesystem::remove(p);
}

TEST_CASE("mono pcm16 reads as one row") {
  const std::vector<std::int16_t> frames = {100, -100, 3000};
  const auto p = dump("mono.wav", pcm16_file(1, 44100, frames, false));
  const TimeSignal x = read_wav(p);
  CHECK(x.channels() == 1);
  CHECK(x.length() == 3);
  CHECK(x.samples(0, 2) == 3000.0 / 32768.0);
  std::filesystem::remove(p);
}

TEST_CASE("unsupported or malformed inputs are rejected") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_wav(temp_path("does_not_exist.wav")), AudioIoError);
  }
  SUBCASE("wrong riff magic") {
    auto bytes = pcm16_file(1, 8000, {1, 2, 3});
    bytes[3] = 'X';  // RIFX
    const auto p = dump("badmagic.wav", bytes);
    CHECK_THROWS_AS(read_wav(p), AudioIoError);
    std::filesystem::remove(p);
  }
  SUBCASE("wrong wave tag") {
    auto bytes = pcm16_file(1, 8000, {1, 2, 3});
    bytes[8] = 'C';
    const auto p = dump("badwave.wav", bytes);
    CHECK_THROWS_AS(read_wav(p), AudioIoError);
    std::filesystem::remove(p);
  }
  SUBCASE("unsupported bit depth") {
    auto bytes = pcm16_file(1, 8000, {1, 2, 3}, false);
    // fmt chunk starts at offset 12; bits live at offset 12+8+14.
    bytes[12 + 8 + 14] = 8;
    const auto p = dump("pcm8.wav", bytes);
    CHECK_THROWS_AS(read_wav(p), AudioIoError);
    std::filesystem::remove(p);
  }
  SUBCASE("unsupported format code") {
    auto bytes = pcm16_file(1, 8000, {1, 2, 3}, false);
    bytes[12 + 8] = 7;  // mu-law
    const auto p = dump("mulaw.wav", bytes);
    CHECK_THROWS_AS(read_wav(p), AudioIoError);
    std::filesystem::remove(p);
  }
  SUBCASE("data chunk overruns the file") {
    auto bytes = pcm16_file(1, 8000, {1, 2, 3}, false);
    bytes.resize(bytes.size() - 2);  // drop one sample's bytes
    const auto p = dump("short.wav", bytes);
    CHECK_THROWS_AS(read_wav(p), AudioIoError);
    std::filesystem::remove(p);
  }
  SUBCASE("missing data chunk") {
    std::vector<unsigned char> body;
    push_tag(body, "fmt ");
    push_u32(body, 16);
    push_u16(body, 1);
    push_u16(body, 1);
    push_u32(body, 8000);
    push_u32(body, 16000);
    push_u16(body, 2);
    push_u16(body, 16);
    std::vector<unsigned char> file;
    push_tag(file, "RIFF");
    push_u32(file, static_cast<std::uint32_t>(4 + body.size()));
    push_tag(file, "WAVE");
    file.insert(file.end(), body.begin(), body.end());
    const auto p = dump("nodata.wav", file);
    CHECK_THROWS_AS(read_wav(p), AudioIoError);
    std::filesystem::remove(p);
  }
}

TEST_CASE("writer rejects empty signals") {
  TimeSignal empty;
  CHECK_THROWS_AS(write_wav(temp_path("empty.wav"), empty), AudioIoError);
}
