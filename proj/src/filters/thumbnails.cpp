#include "sscope/filters/thumbnails.hpp"

#include <algorithm>

#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"

namespace sscope {

std::vector<std::size_t> thumbnail_frame_indices(const FrameSequence& frames, std::size_t count) {
    if (count < 1) throw Error(Errc::invalid_argument, "thumbnail count must be at least 1");
    const std::size_t n = frames.frames.size();
    if (n == 0) return {};
    count = std::min(count, n);
    const double duration = static_cast<double>(frames.duration_ms());
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // Frame k is on screen during [k, k+1) / fps.
        const double midpoint_ms = (static_cast<double>(i) + 0.5) * duration / static_cast<double>(count);
        auto index = static_cast<std::size_t>(midpoint_ms * frames.fps / 1000.0);
        out.push_back(std::min(index, n - 1));
    }
    return out;
}

DataStream thumbnail_track(const FrameSequence& frames, std::size_t count, int scale, const std::filesystem::path& out_dir) {
    DataStream stream;
    stream.name = "thumbnails";
    stream.variant = StreamVariant::thumbnail;
    const auto thumbs = out_dir / "thumbs";
    std::filesystem::create_directories(thumbs);
    for (std::size_t index : thumbnail_frame_indices(frames, count)) {
        const Frame& frame = frames.frames[index];
        const std::string bytes = read_file(frames.dir / frame.file);
        const std::string name = std::filesystem::path(frame.file).filename().string();
        if (auto image = decode_pnm(bytes)) {
            write_file_atomic(thumbs / name, encode_pnm(downscale(*image, scale)));
        } else {
            write_file_atomic(thumbs / name, bytes);
        }
        stream.payload.emplace_back(ThumbRef{frame.t_ms, "thumbs/" + name});
    }
    return stream;
}

}  // namespace sscope
