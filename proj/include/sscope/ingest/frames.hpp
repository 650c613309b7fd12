#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

struct Frame {
    Millis t_ms = 0;
    std::string file;  // relative to the sequence directory
};

// A decoded video: an image directory plus manifest.json of the form
//   {"fps": 30, "frames": ["0001.ppm", ...], "pose": "pose.jsonl"}
// ("pose" is optional). Frame k is stamped round(k * 1000 / fps).
struct FrameSequence {
    double fps = 0.0;
    std::vector<Frame> frames;
    std::filesystem::path dir;
    std::optional<std::string> pose_file;

    Millis duration_ms() const noexcept;
};

inline constexpr const char* kFrameManifest = "manifest.json";

FrameSequence parse_frame_manifest(const json& manifest, std::filesystem::path dir);
// Reads <dir>/manifest.json and checks that every listed frame exists.
FrameSequence load_frame_sequence(const std::filesystem::path& dir);

// 8-bit binary PNM (P5 grey / P6 RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<unsigned char> pixels;
};

std::optional<Image> decode_pnm(std::string_view bytes);
std::string encode_pnm(const Image& image);
// Box-filter downscale by an integer factor (edge blocks average what they cover).
Image downscale(const Image& image, int factor);

}  // namespace sscope
