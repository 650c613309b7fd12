#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

// Mono audio normalized to [-1, 1].
struct AudioBuffer {
    int sample_rate_hz = 0;
    std::vector<double> samples;
    int channel_count = 1;

    Millis duration_ms() const noexcept;
};

enum class PcmEncoding { int16, float32 };

struct WavInfo {
    int sample_rate_hz = 0;
    int channels = 0;
    PcmEncoding encoding = PcmEncoding::int16;
    std::size_t frames = 0;

    Millis duration_ms() const noexcept;
};

// Reads the RIFF header. Throws "unreadable media" on a malformed container
// and "unsupported encoding" for anything other than 16-bit integer or
// 32-bit float PCM.
WavInfo probe_wav(std::string_view bytes);

// Decodes to mono; stereo (or wider) frames are averaged across channels.
// 16-bit samples are scaled by 1/32768.
AudioBuffer decode_wav(std::string_view bytes);

// Interleaved samples in [-1, 1]; int16 encoding rounds to the nearest step.
std::string encode_wav(std::span<const double> interleaved,
                       int channels,
                       int sample_rate_hz,
                       PcmEncoding encoding = PcmEncoding::int16);

}  // namespace sscope
