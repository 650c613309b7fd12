#include "fixtures.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "sscope/core/stream_io.hpp"
#include "sscope/ingest/frames.hpp"
#include "sscope/ingest/wav.hpp"

extern char** environ;

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace sscope::testing {

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "sscope-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::vector<double> sine(double freq_hz, int rate_hz, double seconds, double amplitude) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate_hz));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = amplitude * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / rate_hz);
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

void write_wav(const fs::path& path, const std::vector<double>& mono, int rate_hz) {
    write_text(path, encode_wav(mono, 1, rate_hz));
}

std::map<std::string, Point3> skeleton_with_elbow(double elbow_deg) {
    const double th = elbow_deg * M_PI / 180.0;
    std::map<std::string, Point3> j{
        {"hip", {0.0, 1.0, 0.0}},        {"hip_r", {-0.1, 1.0, 0.0}},     {"knee_r", {-0.1, 0.55, 0.05}},
        {"ankle_r", {-0.1, 0.1, 0.0}},   {"hip_l", {0.1, 1.0, 0.0}},      {"knee_l", {0.1, 0.55, 0.05}},
        {"ankle_l", {0.1, 0.1, 0.0}},    {"spine", {0.0, 1.25, 0.0}},     {"neck", {0.0, 1.5, 0.0}},
        {"nose", {0.0, 1.6, 0.08}},      {"head", {0.0, 1.7, 0.0}},       {"shoulder_l", {0.2, 1.45, 0.0}},
        {"elbow_l", {0.3, 1.2, 0.0}},    {"wrist_l", {0.35, 0.95, 0.05}}, {"shoulder_r", {-0.2, 1.45, 0.0}},
        {"elbow_r", {-0.2, 1.15, 0.0}},
    };
    const Point3 e = j["elbow_r"];
    j["wrist_r"] = {e[0] + 0.25 * std::sin(th), e[1] + 0.25 * std::cos(th), e[2]};
    return j;
}

void write_frame_sequence(const fs::path& dir, std::size_t frames, double fps, const PoseFn& pose, int width,
                          int height) {
    fs::create_directories(dir);
    json names = json::array();
    for (std::size_t k = 0; k < frames; ++k) {
        Image img;
        img.width = width;
        img.height = height;
        img.channels = 1;
        img.pixels.assign(static_cast<std::size_t>(width * height), static_cast<unsigned char>(k % 256));
        char name[32];
        std::snprintf(name, sizeof name, "%05zu.pgm", k + 1);
        write_text(dir / name, encode_pnm(img));
        names.push_back(name);
    }
    json manifest{{"fps", fps}, {"frames", names}};
    if (pose) {
        std::ostringstream lines;
        for (std::size_t k = 0; k < frames; ++k) {
            json joints = json::object();
            for (const auto& [n, p] : pose(k)) joints[n] = {p[0], p[1], p[2]};
            lines << json{{"t_ms", std::llround(static_cast<double>(k) * 1000.0 / fps)}, {"joints", joints}}.dump()
                  << '\n';
        }
        write_text(dir / "pose.jsonl", lines.str());
        manifest["pose"] = "pose.jsonl";
    }
    write_text(dir / "manifest.json", manifest.dump(2));
}

ProcessResult run_process(const std::vector<std::string>& argv) {
    static int counter = 0;
    const fs::path base = fs::temp_directory_path() /
                          ("sscope-proc-" + std::to_string(getpid()) + "-" + std::to_string(counter++));
    const std::string out_path = base.string() + ".out";
    const std::string err_path = base.string() + ".err";

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_addopen(&actions, 1, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_addopen(&actions, 2, err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    pid_t pid = 0;
    const int rc = posix_spawn(&pid, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) throw std::runtime_error("spawn failed: " + argv[0]);
    int status = 0;
    waitpid(pid, &status, 0);

    ProcessResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    r.out = read_file(out_path);
    r.err = read_file(err_path);
    fs::remove(out_path);
    fs::remove(err_path);
    return r;
}

namespace {

pt::ptree parse_svg(const std::string& svg) {
    std::istringstream in(svg);
    pt::ptree tree;
    pt::read_xml(in, tree);
    return tree.get_child("svg");
}

std::string attr(const pt::ptree& node, const std::string& name) {
    return node.get<std::string>("<xmlattr>." + name, "");
}

const pt::ptree* find_group(const pt::ptree& svg, const std::string& id) {
    for (const auto& [tag, child] : svg)
        if (tag == "g" && attr(child, "id") == id) return &child;
    return nullptr;
}

std::size_t count_class(const pt::ptree& node, const std::string& cls) {
    std::size_t n = 0;
    for (const auto& [tag, child] : node) {
        if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
        if (attr(child, "class") == cls) ++n;
        n += count_class(child, cls);
    }
    return n;
}

bool contains_text(const pt::ptree& node, const std::string& text) {
    if (node.data().find(text) != std::string::npos) return true;
    for (const auto& [tag, child] : node)
        if (tag != "<xmlattr>" && contains_text(child, text)) return true;
    return false;
}

}  // namespace

std::vector<std::string> svg_group_ids(const std::string& svg) {
    std::vector<std::string> ids;
    for (const auto& [tag, child] : parse_svg(svg))
        if (tag == "g") ids.push_back(attr(child, "id"));
    return ids;
}

std::size_t svg_count_class(const std::string& svg, const std::string& group_id, const std::string& cls) {
    const pt::ptree root = parse_svg(svg);
    const pt::ptree* g = find_group(root, group_id);
    return g ? count_class(*g, cls) : 0;
}

bool svg_group_contains_text(const std::string& svg, const std::string& group_id, const std::string& text) {
    const pt::ptree root = parse_svg(svg);
    const pt::ptree* g = find_group(root, group_id);
    return g && contains_text(*g, text);
}

double brute_divergence_e(const std::vector<double>& x, const std::vector<double>& y, double alpha) {
    const double m = static_cast<double>(x.size());
    const double n = static_cast<double>(y.size());
    long double between = 0, within_x = 0, within_y = 0;
    for (double a : x)
        for (double b : y) between += std::pow(std::fabs(a - b), alpha);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = i + 1; k < x.size(); ++k) within_x += std::pow(std::fabs(x[i] - x[k]), alpha);
    for (std::size_t j = 0; j < y.size(); ++j)
        for (std::size_t k = j + 1; k < y.size(); ++k) within_y += std::pow(std::fabs(y[j] - y[k]), alpha);
    return static_cast<double>(2.0L / (m * n) * between - within_x / (m * (m - 1) / 2) - within_y / (n * (n - 1) / 2));
}

std::vector<double> brute_speech_rate(const std::vector<TextSegment>& segments, Millis duration, Millis window,
                                      Millis hop) {
    std::vector<double> rates;
    for (Millis s = 0; s < duration || s == 0; s += hop) {
        const bool last = s + window >= duration;
        long long words = 0;
        for (const auto& seg : segments) {
            const double mid = (static_cast<double>(seg.t0_ms) + static_cast<double>(seg.t1_ms)) / 2.0;
            const bool inside = mid >= static_cast<double>(s) &&
                                (mid < static_cast<double>(s + window) || (last && mid <= static_cast<double>(duration)));
            if (inside) words += seg.word_count;
        }
        rates.push_back(static_cast<double>(words) / (static_cast<double>(window) / 1000.0));
        if (duration == 0) break;
    }
    return rates;
}

std::vector<TextSegment> random_segments(std::mt19937_64& rng, std::size_t count, Millis duration) {
    static const char* words[] = {"so", "I", "think", "this", "button", "is", "where", "the", "menu", "opens",
                                  "hmm", "okay", "wait", "let", "me", "try", "again"};
    std::uniform_int_distribution<Millis> start(0, std::max<Millis>(0, duration - 1));
    std::uniform_int_distribution<Millis> length(0, 3000);
    std::uniform_int_distribution<int> n_words(0, 12);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(words) - 1);
    std::vector<TextSegment> out;
    for (std::size_t i = 0; i < count; ++i) {
        TextSegment s;
        s.t0_ms = start(rng);
        s.t1_ms = std::min(duration, s.t0_ms + length(rng));
        const int n = n_words(rng);
        for (int w = 0; w < n; ++w) s.text += (w ? " " : "") + std::string(words[pick(rng)]);
        s.word_count = n;
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const TextSegment& a, const TextSegment& b) { return a.t0_ms < b.t0_ms; });
    return out;
}

}  // namespace sscope::testing
