#pragma once

#include "sscope/core/types.hpp"
#include "sscope/ingest/wav.hpp"

namespace sscope {

struct PitchParams {
    double frame_ms = 40.0;
    double hop_ms = 10.0;
    double fmin_hz = 75.0;
    double fmax_hz = 600.0;
    double voicing_threshold = 0.45;

    static PitchParams from_json(const json& params);
};

// Frame-wise F0 from the normalized autocorrelation
//   r(L) = sum x[n]x[n+L] / sqrt(sum x[n]^2 * sum x[n+L]^2),  n < N - L
// over lags in [rate/fmax, rate/fmin]. The chosen lag is the shortest local
// maximum within 10% of the best peak (guards against picking a multiple of
// the period), refined by parabolic interpolation. Frames whose peak falls
// below voicing_threshold are emitted with voiced=false and value 0.
// Timestamps are frame centers; unit "Hz".
DataStream pitch_track(const AudioBuffer& audio, const PitchParams& params = {});

}  // namespace sscope
