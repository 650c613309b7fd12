#include "sscope/ingest/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "sscope/core/error.hpp"

namespace sscope {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t u16(std::string_view b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      static_cast<unsigned char>(b[at + 1]) << 8);
}

std::uint32_t u32(std::string_view b, std::size_t at) {
    return static_cast<std::uint32_t>(u16(b, at)) | static_cast<std::uint32_t>(u16(b, at + 2)) << 16;
}

void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v & 0xffff));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

struct Layout {
    WavInfo info;
    int bits = 0;
    std::size_t data_offset = 0;
};

[[noreturn]] void unreadable(const std::string& why) { throw Error(Errc::unreadable, "unreadable media", why); }

Layout parse_layout(std::string_view b) {
    if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE")
        unreadable("missing RIFF/WAVE header");
    Layout layout;
    bool have_fmt = false;
    bool have_data = false;
    std::uint16_t format = 0;
    std::size_t data_size = 0;
    std::size_t pos = 12;
    while (pos + 8 <= b.size()) {
        const std::string_view id = b.substr(pos, 4);
        const std::size_t size = u32(b, pos + 4);
        const std::size_t body = pos + 8;
        if (id == "fmt ") {
            if (size < 16 || body + size > b.size()) unreadable("truncated fmt chunk");
            format = u16(b, body);
            layout.info.channels = u16(b, body + 2);
            layout.info.sample_rate_hz = static_cast<int>(u32(b, body + 4));
            layout.bits = u16(b, body + 14);
            if (format == kFormatExtensible) {
                if (size < 40) unreadable("truncated extensible fmt chunk");
                format = u16(b, body + 24);  // first two bytes of the subformat GUID
            }
            have_fmt = true;
        } else if (id == "data") {
            layout.data_offset = body;
            data_size = std::min(size, b.size() - body);
            have_data = true;
            break;
        }
        pos = body + size + (size & 1);
    }
    if (!have_fmt || !have_data) unreadable("missing fmt or data chunk");
    if (layout.info.channels <= 0 || layout.info.sample_rate_hz <= 0) unreadable("invalid channel count or rate");

    if (format == kFormatPcm && layout.bits == 16) {
        layout.info.encoding = PcmEncoding::int16;
    } else if (format == kFormatFloat && layout.bits == 32) {
        layout.info.encoding = PcmEncoding::float32;
    } else {
        throw Error(Errc::unsupported, "unsupported encoding",
                    "format tag " + std::to_string(format) + ", " + std::to_string(layout.bits) +
                        " bits; transcode externally to 16-bit PCM, e.g. "
                        "`ffmpeg -i input -ac 1 -acodec pcm_s16le output.wav`");
    }
    const std::size_t frame_bytes = static_cast<std::size_t>(layout.info.channels) * (layout.bits / 8);
    layout.info.frames = data_size / frame_bytes;
    return layout;
}

}  // namespace

Millis AudioBuffer::duration_ms() const noexcept {
    if (sample_rate_hz <= 0) return 0;
    return static_cast<Millis>(std::llround(static_cast<double>(samples.size()) * 1000.0 / sample_rate_hz));
}

Millis WavInfo::duration_ms() const noexcept {
    if (sample_rate_hz <= 0) return 0;
    return static_cast<Millis>(std::llround(static_cast<double>(frames) * 1000.0 / sample_rate_hz));
}

WavInfo probe_wav(std::string_view bytes) { return parse_layout(bytes).info; }

AudioBuffer decode_wav(std::string_view bytes) {
    const Layout layout = parse_layout(bytes);
    const int channels = layout.info.channels;
    AudioBuffer out;
    out.sample_rate_hz = layout.info.sample_rate_hz;
    out.samples.resize(layout.info.frames);
    const char* data = bytes.data() + layout.data_offset;
    for (std::size_t f = 0; f < layout.info.frames; ++f) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const std::size_t index = f * channels + c;
            if (layout.info.encoding == PcmEncoding::int16) {
                std::int16_t v;
                std::memcpy(&v, data + index * 2, 2);
                acc += static_cast<double>(v) / 32768.0;
            } else {
                float v;
                std::memcpy(&v, data + index * 4, 4);
                acc += static_cast<double>(v);
            }
        }
        out.samples[f] = channels == 1 ? acc : acc / channels;
    }
    return out;
}

std::string encode_wav(std::span<const double> interleaved, int channels, int sample_rate_hz, PcmEncoding encoding) {
    if (channels <= 0 || sample_rate_hz <= 0)
        throw Error(Errc::invalid_argument, "channels and sample rate must be positive");
    const int bytes_per_sample = encoding == PcmEncoding::int16 ? 2 : 4;
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * bytes_per_sample);
    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    put32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put32(out, 16);
    put16(out, encoding == PcmEncoding::int16 ? kFormatPcm : kFormatFloat);
    put16(out, static_cast<std::uint16_t>(channels));
    put32(out, static_cast<std::uint32_t>(sample_rate_hz));
    put32(out, static_cast<std::uint32_t>(sample_rate_hz * channels * bytes_per_sample));
    put16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
    put16(out, static_cast<std::uint16_t>(bytes_per_sample * 8));
    out += "data";
    put32(out, data_bytes);
    for (double v : interleaved) {
        if (encoding == PcmEncoding::int16) {
            const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
            const auto q = static_cast<std::int16_t>(scaled);
            char raw[2];
            std::memcpy(raw, &q, 2);
            out.append(raw, 2);
        } else {
            const auto f = static_cast<float>(v);
            char raw[4];
            std::memcpy(raw, &f, 4);
            out.append(raw, 4);
        }
    }
    return out;
}

}  // namespace sscope
