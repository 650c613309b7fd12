#include "sscope/ingest/transcript.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>

#include "sscope/core/error.hpp"

namespace sscope {
namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<long long> parse_uint(std::string_view s) {
    if (s.empty()) return std::nullopt;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
    return v;
}

// [HH:]MM:SS(,|.)mmm
std::optional<Millis> parse_clock(std::string_view s) {
    const std::size_t frac_sep = s.find_last_of(",.");
    if (frac_sep == std::string_view::npos) return std::nullopt;
    const std::string_view frac = s.substr(frac_sep + 1);
    if (frac.size() != 3) return std::nullopt;
    auto ms = parse_uint(frac);
    std::string_view hms = s.substr(0, frac_sep);
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t colon = hms.find(':', pos);
        parts.push_back(hms.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos));
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
    }
    if (!ms || parts.size() < 2 || parts.size() > 3) return std::nullopt;
    long long h = 0;
    if (parts.size() == 3) {
        auto hv = parse_uint(parts[0]);
        if (!hv) return std::nullopt;
        h = *hv;
    }
    auto m = parse_uint(parts[parts.size() - 2]);
    auto sec = parse_uint(parts.back());
    if (!m || !sec || *m >= 60 || *sec >= 60 || parts.back().size() != 2) return std::nullopt;
    return ((h * 60 + *m) * 60 + *sec) * 1000 + *ms;
}

bool is_timing_line(std::string_view line) { return line.find("-->") != std::string_view::npos; }

[[noreturn]] void malformed(std::size_t line_no, std::string_view line) {
    throw Error(Errc::unreadable, "malformed timestamp at line " + std::to_string(line_no), std::string(line));
}

std::pair<Millis, Millis> parse_timing(std::string_view line, std::size_t line_no) {
    const std::size_t arrow = line.find("-->");
    std::string_view left = trim(line.substr(0, arrow));
    std::string_view right = trim(line.substr(arrow + 3));
    // WebVTT cue settings follow the end time.
    if (auto sp = right.find_first_of(" \t"); sp != std::string_view::npos) right = right.substr(0, sp);
    auto t0 = parse_clock(left);
    auto t1 = parse_clock(right);
    if (!t0 || !t1 || *t0 > *t1) malformed(line_no, line);
    return {*t0, *t1};
}

std::vector<TextSegment> parse_cues(const std::vector<std::string_view>& lines, std::size_t first, bool vtt) {
    std::vector<TextSegment> out;
    std::size_t i = first;
    while (i < lines.size()) {
        if (trim(lines[i]).empty()) {
            ++i;
            continue;
        }
        const std::size_t block_start = i;
        std::size_t block_end = i;
        while (block_end < lines.size() && !trim(lines[block_end]).empty()) ++block_end;
        if (vtt) {
            const std::string_view head = trim(lines[block_start]);
            if (head.starts_with("NOTE") || head == "STYLE" || head == "REGION") {
                i = block_end;
                continue;
            }
        }
        // Optional cue identifier (srt index / vtt id) precedes the timing line.
        std::size_t timing = block_start;
        if (!is_timing_line(lines[timing]) && timing + 1 < block_end && is_timing_line(lines[timing + 1])) ++timing;
        if (!is_timing_line(lines[timing])) malformed(timing + 1, lines[timing]);
        auto [t0, t1] = parse_timing(lines[timing], timing + 1);
        std::string text;
        for (std::size_t k = timing + 1; k < block_end; ++k) {
            if (!text.empty()) text += '\n';
            text += lines[k];
        }
        out.push_back(TextSegment{t0, t1, text, count_words(text)});
        i = block_end;
    }
    return out;
}

std::vector<TextSegment> parse_jsonl(const std::vector<std::string_view>& lines) {
    std::vector<TextSegment> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        try {
            const json j = json::parse(lines[i]);
            TextSegment s;
            s.t0_ms = j.at("t0_ms").get<Millis>();
            s.t1_ms = j.at("t1_ms").get<Millis>();
            s.text = j.at("text").get<std::string>();
            s.word_count = count_words(s.text);
            if (s.t0_ms < 0 || s.t0_ms > s.t1_ms) malformed(i + 1, lines[i]);
            out.push_back(std::move(s));
        } catch (const json::exception&) {
            malformed(i + 1, lines[i]);
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(TranscriptFormat format) noexcept {
    switch (format) {
    case TranscriptFormat::srt: return "srt";
    case TranscriptFormat::vtt: return "vtt";
    case TranscriptFormat::jsonl: return "jsonl";
    }
    return "srt";
}

TranscriptFormat transcript_format_from_string(std::string_view text) {
    if (text == "srt") return TranscriptFormat::srt;
    if (text == "vtt" || text == "webvtt") return TranscriptFormat::vtt;
    if (text == "jsonl") return TranscriptFormat::jsonl;
    throw Error(Errc::invalid_argument, "unknown transcript format: " + std::string(text));
}

TranscriptFormat transcript_format_for_path(std::string_view path) {
    const auto dot = path.rfind('.');
    if (dot == std::string_view::npos) throw Error(Errc::invalid_argument, "cannot infer transcript format");
    std::string ext(path.substr(dot + 1));
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "json") ext = "jsonl";
    return transcript_format_from_string(ext);
}

std::vector<TextSegment> parse_transcript(std::string_view text, TranscriptFormat format) {
    const auto lines = split_lines(text);
    std::vector<TextSegment> segments;
    switch (format) {
    case TranscriptFormat::srt:
        segments = parse_cues(lines, 0, false);
        break;
    case TranscriptFormat::vtt: {
        if (lines.empty()) break;
        if (!trim(lines[0]).starts_with("WEBVTT"))
            throw Error(Errc::unreadable, "missing WEBVTT header at line 1");
        std::size_t first = 1;
        while (first < lines.size() && !trim(lines[first]).empty()) ++first;  // header block
        segments = parse_cues(lines, first, true);
        break;
    }
    case TranscriptFormat::jsonl:
        segments = parse_jsonl(lines);
        break;
    }
    std::stable_sort(segments.begin(), segments.end(),
                     [](const TextSegment& a, const TextSegment& b) { return a.t0_ms < b.t0_ms; });
    return segments;
}

std::string format_timestamp(Millis t_ms, TranscriptFormat format) {
    const long long ms = t_ms % 1000;
    const long long total_s = t_ms / 1000;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld%c%03lld", total_s / 3600, (total_s / 60) % 60,
                  total_s % 60, format == TranscriptFormat::srt ? ',' : '.', ms);
    return buf;
}

std::string serialize_transcript(std::span<const TextSegment> segments, TranscriptFormat format) {
    std::string out;
    if (format == TranscriptFormat::jsonl) {
        for (const auto& s : segments)
            out += json{{"t0_ms", s.t0_ms}, {"t1_ms", s.t1_ms}, {"text", s.text}}.dump() + "\n";
        return out;
    }
    if (format == TranscriptFormat::vtt) out += "WEBVTT\n\n";
    std::size_t index = 1;
    for (const auto& s : segments) {
        if (format == TranscriptFormat::srt) out += std::to_string(index++) + "\n";
        out += format_timestamp(s.t0_ms, format) + " --> " + format_timestamp(s.t1_ms, format) + "\n";
        out += s.text + "\n\n";
    }
    return out;
}

}  // namespace sscope
