// Copyright 2026 The cbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "cbss/spectrogram.hpp"

namespace cbss {

// RIFF/WAVE reader for 16-bit PCM and 32-bit float, any channel count.
// PCM16 maps to [-1, 1) by dividing by 32768. Throws AudioIoError on
// unreadable files or unsupported encodings.
TimeSignal read_wav(const std::filesystem::path& path);

// 32-bit float writer; samples are stored exactly (float precision).
void write_wav(const std::filesystem::path& path, const TimeSignal& x);

}  // namespace cbss
