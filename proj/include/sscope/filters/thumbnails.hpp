#pragma once

#include <filesystem>
#include <vector>

#include "sscope/core/types.hpp"
#include "sscope/ingest/frames.hpp"

namespace sscope {

// Indices of the frames shown at the midpoints of `count` equal-width bins
// of the sequence duration: the frame on screen at each midpoint. `count`
// is clamped to the frame count; must be >= 1.
std::vector<std::size_t> thumbnail_frame_indices(const FrameSequence& frames, std::size_t count);

// Writes a downscaled copy of each selected frame under out_dir/thumbs/ and
// returns ThumbRefs holding paths relative to out_dir. PNM frames are
// box-filtered by `scale`; other image formats are copied unchanged.
DataStream thumbnail_track(const FrameSequence& frames,
                           std::size_t count,
                           int scale,
                           const std::filesystem::path& out_dir);

}  // namespace sscope
