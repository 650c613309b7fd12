#include "sscope/ingest/frames.hpp"

#include <cctype>
#include <cmath>

#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"

namespace sscope {

Millis FrameSequence::duration_ms() const noexcept {
    if (fps <= 0.0) return 0;
    return static_cast<Millis>(std::llround(static_cast<double>(frames.size()) * 1000.0 / fps));
}

FrameSequence parse_frame_manifest(const json& manifest, std::filesystem::path dir) {
    FrameSequence seq;
    seq.dir = std::move(dir);
    try {
        seq.fps = manifest.at("fps").get<double>();
        if (!(seq.fps > 0.0) || !std::isfinite(seq.fps))
            throw Error(Errc::unreadable, "unreadable media", "fps must be positive");
        const auto& files = manifest.at("frames");
        seq.frames.reserve(files.size());
        for (std::size_t k = 0; k < files.size(); ++k) {
            const auto t = static_cast<Millis>(std::llround(static_cast<double>(k) * 1000.0 / seq.fps));
            const std::string file = files[k].get<std::string>();
            if (file.empty() || file.find("..") != std::string::npos || file.front() == '/')
                throw Error(Errc::unreadable, "unreadable media", "bad frame file name: " + file);
            seq.frames.push_back(Frame{t, file});
        }
        if (manifest.contains("pose")) seq.pose_file = manifest.at("pose").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(Errc::unreadable, "unreadable media", std::string("frame manifest: ") + e.what());
    }
    return seq;
}

FrameSequence load_frame_sequence(const std::filesystem::path& dir) {
    const auto manifest_path = dir / kFrameManifest;
    if (!std::filesystem::is_regular_file(manifest_path))
        throw Error(Errc::unreadable, "unreadable media", "missing " + manifest_path.string());
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw Error(Errc::unreadable, "unreadable media", e.what());
    }
    FrameSequence seq = parse_frame_manifest(manifest, dir);
    for (const auto& f : seq.frames)
        if (!std::filesystem::is_regular_file(dir / f.file))
            throw Error(Errc::unreadable, "unreadable media", "missing frame " + f.file);
    return seq;
}

namespace {

// Skips whitespace and '#' comments, then reads a decimal integer.
bool read_header_int(std::string_view b, std::size_t& pos, int& out) {
    while (pos < b.size()) {
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(b[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= b.size() || !std::isdigit(static_cast<unsigned char>(b[pos]))) return false;
    long v = 0;
    while (pos < b.size() && std::isdigit(static_cast<unsigned char>(b[pos]))) {
        v = v * 10 + (b[pos] - '0');
        if (v > 1 << 20) return false;
        ++pos;
    }
    out = static_cast<int>(v);
    return true;
}

}  // namespace

std::optional<Image> decode_pnm(std::string_view b) {
    if (b.size() < 3 || b[0] != 'P' || (b[1] != '5' && b[1] != '6')) return std::nullopt;
    Image img;
    img.channels = b[1] == '6' ? 3 : 1;
    std::size_t pos = 2;
    int maxval = 0;
    if (!read_header_int(b, pos, img.width) || !read_header_int(b, pos, img.height) ||
        !read_header_int(b, pos, maxval) || maxval != 255 || pos >= b.size())
        return std::nullopt;
    ++pos;  // single whitespace before raster
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (b.size() - pos < n) return std::nullopt;
    img.pixels.assign(b.begin() + static_cast<std::ptrdiff_t>(pos), b.begin() + static_cast<std::ptrdiff_t>(pos + n));
    return img;
}

std::string encode_pnm(const Image& image) {
    std::string out = (image.channels == 3 ? "P6\n" : "P5\n") + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.append(image.pixels.begin(), image.pixels.end());
    return out;
}

Image downscale(const Image& image, int factor) {
    if (factor <= 1) return image;
    Image out;
    out.channels = image.channels;
    out.width = (image.width + factor - 1) / factor;
    out.height = (image.height + factor - 1) / factor;
    out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            for (int c = 0; c < out.channels; ++c) {
                unsigned sum = 0;
                unsigned count = 0;
                for (int dy = 0; dy < factor && y * factor + dy < image.height; ++dy)
                    for (int dx = 0; dx < factor && x * factor + dx < image.width; ++dx) {
                        const std::size_t src =
                            (static_cast<std::size_t>(y * factor + dy) * image.width + (x * factor + dx)) *
                                image.channels + c;
                        sum += image.pixels[src];
                        ++count;
                    }
                out.pixels[(static_cast<std::size_t>(y) * out.width + x) * out.channels + c] =
                    static_cast<unsigned char>((sum + count / 2) / count);
            }
        }
    }
    return out;
}

}  // namespace sscope
