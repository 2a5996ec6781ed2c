// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cbss/image.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "cbss/errors.hpp"

namespace cbss {

void write_magnitude_pgm(const std::filesystem::path& path, const Spectrogram& s, int channel,
                         double db_range) {
  if (channel < 0 || channel >= s.channels)
    throw DimensionError("write_magnitude_pgm: channel out of range");
  if (!(db_range > 0.0)) throw ConfigError("write_magnitude_pgm: db_range must be positive");

  double peak = 0.0;
  for (int t = 0; t < s.frames; ++t)
    for (int f = 0; f < s.bins; ++f) peak = std::max(peak, std::abs(s.at(channel, t, f)));

  std::vector<unsigned char> pixels(static_cast<std::size_t>(s.frames) * s.bins, 0);
  if (peak > 0.0) {
    const double top_db = 20.0 * std::log10(peak);
    const double floor_db = top_db - db_range;
    for (int f = 0; f < s.bins; ++f) {
      const int row = s.bins - 1 - f;  // highest bin on top
      for (int t = 0; t < s.frames; ++t) {
        const double mag = std::abs(s.at(channel, t, f));
        if (mag <= 0.0) continue;
        const double db = 20.0 * std::log10(mag);
        if (db <= floor_db) continue;
        const long v = std::lround(255.0 * (db - floor_db) / db_range);
        pixels[static_cast<std::size_t>(row) * s.frames + t] =
            static_cast<unsigned char>(std::min(v, 255L));
      }
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.good()) throw AudioIoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << s.frames << " " << s.bins << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<long>(pixels.size()));
  if (!out.good()) throw AudioIoError("short write to " + path.string());
}

}  // namespace cbss
