// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "cbss/spectrogram.hpp"

namespace cbss {

// 8-bit grayscale PGM of one channel's magnitude in dB, clipped to
// [max - db_range, max]. Rows are frequency bins, highest bin on top;
// columns are frames.
void write_magnitude_pgm(const std::filesystem::path& path, const Spectrogram& s, int channel,
                         double db_range = 100.0);

}  // namespace cbss
