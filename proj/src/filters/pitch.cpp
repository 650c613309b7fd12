#include "sscope/filters/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sscope/core/error.hpp"
#include "sscope/kernels/kernels.hpp"

namespace sscope {
namespace {

// A local maximum this close to the global peak wins if its lag is shorter.
constexpr double kOctaveTolerance = 0.9;

}  // namespace

PitchParams PitchParams::from_json(const json& p) {
    PitchParams out;
    out.frame_ms = p.value("frame_ms", out.frame_ms);
    out.hop_ms = p.value("hop_ms", out.hop_ms);
    out.fmin_hz = p.value("fmin_hz", out.fmin_hz);
    out.fmax_hz = p.value("fmax_hz", out.fmax_hz);
    out.voicing_threshold = p.value("voicing_threshold", out.voicing_threshold);
    return out;
}

DataStream pitch_track(const AudioBuffer& audio, const PitchParams& params) {
    if (!(params.fmin_hz > 0.0) || params.fmin_hz >= params.fmax_hz)
        throw Error(Errc::invalid_argument, "pitch: fmin_hz must be positive and below fmax_hz");
    if (!(params.frame_ms > 0.0) || !(params.hop_ms > 0.0))
        throw Error(Errc::invalid_argument, "pitch: frame_ms and hop_ms must be positive");

    DataStream out;
    out.name = "pitch";
    out.variant = StreamVariant::continuous;
    out.unit = "Hz";
    if (audio.samples.empty()) return out;

    const double rate = audio.sample_rate_hz;
    if (rate < 2.0 * params.fmax_hz)
        throw Error(Errc::invalid_argument, "pitch: sample rate must be at least 2 * fmax_hz");

    const auto frame_len = static_cast<std::size_t>(std::llround(params.frame_ms * rate / 1000.0));
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.hop_ms * rate / 1000.0)));
    const auto min_lag = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(rate / params.fmax_hz)));
    const auto max_lag = std::min<std::size_t>(frame_len >= 2 ? frame_len - 2 : 0,
                                               static_cast<std::size_t>(std::floor(rate / params.fmin_hz)));
    if (frame_len < 4 || min_lag > max_lag) return out;

    const auto& k = kernels::active();
    std::vector<double> r(max_lag + 2, 0.0);
    const std::span<const double> x(audio.samples);

    for (std::size_t start = 0; start + frame_len <= x.size(); start += hop) {
        const double* f = x.data() + start;
        // Energies of the overlapping parts shrink by one sample per lag.
        const double full = k.dot(f, f, frame_len);
        double head = full;
        double tail = full;
        for (std::size_t lag = 1; lag < min_lag - 1; ++lag) {
            head -= f[frame_len - lag] * f[frame_len - lag];
            tail -= f[lag - 1] * f[lag - 1];
        }
        for (std::size_t lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
            head -= f[frame_len - lag] * f[frame_len - lag];
            tail -= f[lag - 1] * f[lag - 1];
            const double denom = head * tail;
            const double floor = 1e-12 * full * full;
            r[lag] = (head > 0.0 && tail > 0.0 && denom > floor)
                         ? k.dot(f, f + lag, frame_len - lag) / std::sqrt(denom)
                         : 0.0;
        }

        std::size_t best = min_lag;
        for (std::size_t lag = min_lag; lag <= max_lag; ++lag)
            if (r[lag] > r[best]) best = lag;
        const double peak = r[best];
        for (std::size_t lag = min_lag; lag < best; ++lag) {
            if (r[lag] >= kOctaveTolerance * peak && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
                best = lag;
                break;
            }
        }

        Sample s;
        s.t_ms = static_cast<Millis>(std::llround((static_cast<double>(start) + frame_len / 2.0) * 1000.0 / rate));
        if (!(peak > 0.0) || r[best] < params.voicing_threshold) {
            s.value = 0.0;
            s.voiced = false;
        } else {
            const double left = r[best - 1];
            const double mid = r[best];
            const double right = r[best + 1];
            const double curvature = left - 2.0 * mid + right;
            double offset = curvature < 0.0 ? 0.5 * (left - right) / curvature : 0.0;
            offset = std::clamp(offset, -0.5, 0.5);
            s.value = std::clamp(rate / (static_cast<double>(best) + offset), params.fmin_hz, params.fmax_hz);
            s.voiced = true;
        }
        out.payload.emplace_back(s);
    }
    return out;
}

}  // namespace sscope
