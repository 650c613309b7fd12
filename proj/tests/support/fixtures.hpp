#pragma once

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::vector<double> sine(double freq_hz, int rate_hz, double seconds, double amplitude = 0.8);

void write_wav(const std::filesystem::path& path, const std::vector<double>& mono, int rate_hz);
void write_text(const std::filesystem::path& path, const std::string& text);

using PoseFn = std::function<std::map<std::string, Point3>(std::size_t frame)>;

// A standing 17-joint skeleton whose right forearm sits at `elbow_deg`.
std::map<std::string, Point3> skeleton_with_elbow(double elbow_deg);

// PGM frames plus manifest.json; a pose.jsonl is written when `pose` is set.
void write_frame_sequence(const std::filesystem::path& dir, std::size_t frames, double fps,
                          const PoseFn& pose = {}, int width = 16, int height = 12);

// Child-process result; stdout and stderr are captured separately.
struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};
ProcessResult run_process(const std::vector<std::string>& argv);

// Ids of the top-level <g> elements; throws when the document is not
// well-formed XML.
std::vector<std::string> svg_group_ids(const std::string& svg);
// Elements anywhere below <g id="group_id"> whose class attribute is `cls`.
std::size_t svg_count_class(const std::string& svg, const std::string& group_id, const std::string& cls);
bool svg_group_contains_text(const std::string& svg, const std::string& group_id, const std::string& text);

// Independent oracles.
double brute_divergence_e(const std::vector<double>& x, const std::vector<double>& y, double alpha);
std::vector<double> brute_speech_rate(const std::vector<TextSegment>& segments, Millis duration, Millis window,
                                      Millis hop);

std::vector<TextSegment> random_segments(std::mt19937_64& rng, std::size_t count, Millis duration);

}  // namespace sscope::testing
