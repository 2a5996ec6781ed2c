// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cbss/errors.hpp"

namespace cbss {
namespace {

using Bytes = std::vector<unsigned char>;

std::uint32_t rd_u32(const Bytes& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t rd_u16(const Bytes& b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<std::uint16_t>(b[at]) |
                                    (static_cast<std::uint16_t>(b[at + 1]) << 8));
}

bool tag_is(const Bytes& b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void wr_u16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xff));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

void wr_u32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void wr_tag(Bytes& b, const char* tag) {
  b.insert(b.end(), tag, tag + 4);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

}  // namespace

TimeSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw AudioIoError("cannot open " + path.string());
  Bytes bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE"))
    throw AudioIoError(path.string() + ": not a RIFF/WAVE file");

  // Chunk walk. Sizes are word-aligned: odd chunks carry one pad byte.
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, block_align = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_at = 0, data_size = 0;
  bool have_data = false;

  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const std::uint32_t csize = rd_u32(bytes, at + 4);
    const std::size_t body = at + 8;
    if (body + csize > bytes.size())
      throw AudioIoError(path.string() + ": chunk overruns the file");
    if (tag_is(bytes, at, "fmt ")) {
      if (csize < 16) throw AudioIoError(path.string() + ": fmt chunk too short");
      format = rd_u16(bytes, body);
      channels = rd_u16(bytes, body + 2);
      rate = rd_u32(bytes, body + 4);
      block_align = rd_u16(bytes, body + 12);
      bits = rd_u16(bytes, body + 14);
      have_fmt = true;
    } else if (tag_is(bytes, at, "data") && !have_data) {
      data_at = body;
      data_size = csize;
      have_data = true;
    }
    at = body + csize + (csize & 1);
  }

  if (!have_fmt) throw AudioIoError(path.string() + ": missing fmt chunk");
  if (!have_data) throw AudioIoError(path.string() + ": missing data chunk");
  if (channels < 1 || rate == 0) throw AudioIoError(path.string() + ": malformed fmt chunk");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    throw AudioIoError(path.string() + ": unsupported encoding (format " +
                       std::to_string(format) + ", " + std::to_string(bits) +
                       " bits); only PCM16 and float32 are readable");

  const std::size_t bytes_per_sample = bits / 8;
  if (block_align != channels * bytes_per_sample || data_size % block_align != 0)
    throw AudioIoError(path.string() + ": data size does not match the frame layout");

  const std::size_t frames = data_size / block_align;
  TimeSignal out;
  out.sample_rate = static_cast<double>(rate);
  out.samples.resize(channels, static_cast<long>(frames));

  for (std::size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const std::size_t p = data_at + (i * channels + c) * bytes_per_sample;
      if (pcm16) {
        const auto v = static_cast<std::int16_t>(rd_u16(bytes, p));
        out.samples(c, static_cast<long>(i)) = static_cast<double>(v) / 32768.0;
      } else {
        const std::uint32_t u = rd_u32(bytes, p);
        float f;
        std::memcpy(&f, &u, sizeof f);
        out.samples(c, static_cast<long>(i)) = static_cast<double>(f);
      }
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const TimeSignal& x) {
  if (x.channels() < 1 || x.length() < 1)
    throw AudioIoError("refusing to write an empty signal to " + path.string());
  if (!(x.sample_rate > 0.0) || !std::isfinite(x.sample_rate))
    throw AudioIoError("invalid sample rate for " + path.string());

  const auto channels = static_cast<std::uint16_t>(x.channels());
  const auto frames = static_cast<std::uint32_t>(x.length());
  const auto rate = static_cast<std::uint32_t>(std::llround(x.sample_rate));
  const std::uint16_t block_align = channels * 4;
  const std::uint32_t data_size = frames * block_align;

  Bytes b;
  wr_tag(b, "RIFF");
  wr_u32(b, 4 + (8 + 16) + (8 + 4) + (8 + data_size));
  wr_tag(b, "WAVE");
  wr_tag(b, "fmt ");
  wr_u32(b, 16);
  wr_u16(b, kFormatFloat);
  wr_u16(b, channels);
  wr_u32(b, rate);
  wr_u32(b, rate * block_align);
  wr_u16(b, block_align);
  wr_u16(b, 32);
  wr_tag(b, "fact");
  wr_u32(b, 4);
  wr_u32(b, frames);
  wr_tag(b, "data");
  wr_u32(b, data_size);
  b.reserve(b.size() + data_size);
  for (std::uint32_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const auto f = static_cast<float>(x.samples(c, static_cast<long>(i)));
      std::uint32_t u;
      std::memcpy(&u, &f, sizeof u);
      wr_u32(b, u);
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.good()) throw AudioIoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<long>(b.size()));
  if (!out.good()) throw AudioIoError("short write to " + path.string());
}

}  // namespace cbss
