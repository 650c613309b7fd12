#include "sscope/report/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sscope/core/error.hpp"
#include "sscope/core/stream_ops.hpp"

namespace sscope {

namespace {

constexpr double kWidth = 720.0;
constexpr double kMargin = 16.0;
constexpr double kLine = 16.0;
constexpr std::size_t kWrap = 96;

const char* const kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string clock(Millis t) {
    const Millis s = t / 1000;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld.%03lld", static_cast<long long>(s / 3600),
                  static_cast<long long>(s / 60 % 60), static_cast<long long>(s % 60),
                  static_cast<long long>(t % 1000));
    return buf;
}

std::vector<std::string> wrap(std::string_view text, std::size_t width) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream words{std::string(text)};
    for (std::string w; words >> w;) {
        if (!line.empty() && line.size() + 1 + w.size() > width) {
            lines.push_back(std::move(line));
            line.clear();
        }
        if (!line.empty()) line += ' ';
        line += w;
    }
    if (!line.empty()) lines.push_back(std::move(line));
    return lines;
}

const char* color_for(std::string_view key) {
    std::size_t h = 1469598103934665603ull;
    for (unsigned char c : key) h = (h ^ c) * 1099511628211ull;
    return kPalette[h % std::size(kPalette)];
}

void text_lines(std::ostream& os, const std::vector<std::string>& lines, double x, double& y, const char* cls) {
    for (const auto& l : lines) {
        y += kLine;
        os << "<text class=\"" << cls << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\">" << xml_escape(l)
           << "</text>\n";
    }
}

struct Scale {
    Millis lo, hi;
    double x0, x1;
    double operator()(Millis t) const {
        return x0 + (x1 - x0) * static_cast<double>(t - lo) / static_cast<double>(std::max<Millis>(1, hi - lo));
    }
};

void render_timeline(std::ostream& os, const DataStream& slice, const Annotation& a, const Scale& x, double top,
                     double height) {
    const double bottom = top + height;
    os << "<rect class=\"frame\" x=\"" << num(x.x0) << "\" y=\"" << num(top) << "\" width=\"" << num(x.x1 - x.x0)
       << "\" height=\"" << num(height) << "\" fill=\"#fafafa\" stroke=\"#ccc\"/>\n";
    os << "<rect class=\"selection\" x=\"" << num(x(a.t0_ms)) << "\" y=\"" << num(top) << "\" width=\""
       << num(std::max(1.0, x(a.t1_ms) - x(a.t0_ms))) << "\" height=\"" << num(height)
       << "\" fill=\"#ffe08a\" fill-opacity=\"0.5\"/>\n";

    if (slice.variant == StreamVariant::continuous) {
        double vmin = INFINITY, vmax = -INFINITY;
        for (const auto& r : slice.payload)
            if (const auto* s = std::get_if<Sample>(&r); s && s->voiced.value_or(true)) {
                vmin = std::min(vmin, s->value);
                vmax = std::max(vmax, s->value);
            }
        if (!(vmax > vmin)) {
            vmin = std::isfinite(vmin) ? vmin - 1.0 : 0.0;
            vmax = vmin + 2.0;
        }
        auto y = [&](double v) { return bottom - 4.0 - (height - 8.0) * (v - vmin) / (vmax - vmin); };
        std::ostringstream path;
        bool open = false;
        for (const auto& r : slice.payload) {
            const auto* s = std::get_if<Sample>(&r);
            if (!s || !s->voiced.value_or(true)) {
                open = false;
                continue;
            }
            path << (open ? " H" : " M") << num(x(s->t_ms)) << (open ? " V" : " ") << num(y(s->value));
            open = true;
        }
        if (!path.str().empty())
            os << "<path class=\"trace\" d=\"" << path.str().substr(1) << "\" fill=\"none\" stroke=\""
               << color_for(slice.name) << "\"/>\n";
        for (const auto& r : slice.payload) {
            const Millis t = record_start(r);
            const auto* s = std::get_if<Sample>(&r);
            const bool voiced = s && s->voiced.value_or(true);
            os << "<circle class=\"rec\" cx=\"" << num(x(t)) << "\" cy=\"" << num(voiced ? y(s->value) : bottom - 2.0)
               << "\" r=\"1.5\" fill=\"" << (voiced ? color_for(slice.name) : "#bbb") << "\"/>\n";
        }
        return;
    }

    for (const auto& r : slice.payload) {
        const double xa = x(record_start(r));
        const double w = std::max(1.0, x(record_end(r)) - xa);
        if (const auto* e = std::get_if<EventSpan>(&r)) {
            const double h = (height - 4.0) * e->probability;
            os << "<rect class=\"rec\" x=\"" << num(xa) << "\" y=\"" << num(bottom - h) << "\" width=\"" << num(w)
               << "\" height=\"" << num(h) << "\" fill=\"" << color_for(e->label) << "\" fill-opacity=\"0.7\"><title>"
               << xml_escape(e->label) << " " << num(e->probability) << "</title></rect>\n";
        } else if (const auto* t = std::get_if<TextSegment>(&r)) {
            os << "<rect class=\"rec\" x=\"" << num(xa) << "\" y=\"" << num(top + 2.0) << "\" width=\"" << num(w)
               << "\" height=\"" << num(height - 4.0) << "\" fill=\"#9ecae1\" fill-opacity=\"0.5\"><title>"
               << xml_escape(t->text) << "</title></rect>\n";
        } else if (const auto* th = std::get_if<ThumbRef>(&r)) {
            os << "<rect class=\"rec\" x=\"" << num(xa - 0.5) << "\" y=\"" << num(top) << "\" width=\"1\" height=\""
               << num(height) << "\" fill=\"#666\"><title>" << xml_escape(th->ref) << "</title></rect>\n";
        } else {
            os << "<circle class=\"rec\" cx=\"" << num(xa) << "\" cy=\"" << num(top + height / 2) << "\" r=\"1.5\" fill=\""
               << color_for(slice.name) << "\"/>\n";
        }
    }
}

}  // namespace

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default:
            // Control characters are not allowed in XML 1.0.
            if (static_cast<unsigned char>(c) < 0x20 && c != '\n' && c != '\t' && c != '\r')
                out += ' ';
            else
                out += c;
        }
    }
    return out;
}

std::string annotlette_svg(const ProjectStore& store, std::string_view annotation_id, Millis context_pad_ms) {
    if (context_pad_ms < 0) throw Error(Errc::invalid_argument, "context pad must be non-negative");
    const Annotation a = store.annotation(annotation_id);
    const Project project = store.project(a.project_id);
    const StreamInfo* info = project.stream(a.stream_id);
    if (!info) throw Error(Errc::not_found, "unknown stream: " + a.stream_id);
    const Millis lo = std::max<Millis>(0, a.t0_ms - context_pad_ms);
    const Millis hi = a.t1_ms + context_pad_ms;

    std::vector<TextSegment> dialogue;
    for (const auto& s : project.streams) {
        if (s.filter_id != kTranscriptFilter) continue;
        for (const auto& r : slice_stream(store.load_stream(s.id), lo, hi).payload)
            if (const auto* seg = std::get_if<TextSegment>(&r)) dialogue.push_back(*seg);
    }
    std::stable_sort(dialogue.begin(), dialogue.end(),
                     [](const TextSegment& x, const TextSegment& y) { return x.t0_ms < y.t0_ms; });
    const DataStream slice = slice_stream(store.load_stream(a.stream_id), lo, hi);

    std::ostringstream body;
    double y = kMargin;

    body << "<g id=\"metadata\">\n";
    text_lines(body,
               {(a.kind == AnnotationKind::point ? "Point at " + clock(a.t0_ms)
                                                 : "Interval " + clock(a.t0_ms) + " to " + clock(a.t1_ms)),
                "Stream: " + info->name + (info->unit ? " (" + *info->unit + ")" : "") + "  [" + info->id + "]",
                "Author: " + (a.author.empty() ? std::string("anonymous") : a.author) + "  Created: " + a.created_at},
               kMargin, y, "meta");
    body << "</g>\n";

    y += kLine / 2;
    body << "<g id=\"transcript\">\n";
    if (dialogue.empty()) {
        text_lines(body, {kNoDialoguePlaceholder}, kMargin, y, "placeholder");
    } else {
        for (const auto& seg : dialogue) {
            auto lines = wrap("[" + clock(seg.t0_ms) + "] " + seg.text, kWrap);
            text_lines(body, lines, kMargin, y, "segment");
        }
    }
    body << "</g>\n";

    y += kLine / 2;
    body << "<g id=\"annotation\">\n";
    auto note = wrap(a.text, kWrap);
    if (note.empty()) note.push_back("(no text)");
    text_lines(body, note, kMargin, y, "note");
    body << "</g>\n";

    y += kLine;
    const double track_h = 80.0;
    const Scale x{lo, std::max(hi, lo + 1), kMargin, kWidth - kMargin};
    body << "<g id=\"timeline\" data-from=\"" << lo << "\" data-to=\"" << hi << "\" data-records=\""
         << slice.payload.size() << "\">\n";
    render_timeline(body, slice, a, x, y, track_h);
    y += track_h;
    body << "<text class=\"tick\" x=\"" << num(x.x0) << "\" y=\"" << num(y + kLine) << "\">" << clock(lo)
         << "</text>\n";
    body << "<text class=\"tick\" x=\"" << num(x.x1) << "\" y=\"" << num(y + kLine) << "\" text-anchor=\"end\">"
         << clock(hi) << "</text>\n";
    body << "</g>\n";
    y += kLine + kMargin;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(y)
        << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(y) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
    return svg.str();
}

std::string annotations_overview_svg(const ProjectStore& store, std::string_view project_id) {
    const Project project = store.project(project_id);
    const Millis duration = std::max<Millis>(1, project.session_duration());
    std::vector<Annotation> annotations = project.annotations;
    std::stable_sort(annotations.begin(), annotations.end(),
                     [](const Annotation& a, const Annotation& b) { return a.t0_ms < b.t0_ms; });
    std::vector<std::string> lanes;
    for (const auto& a : annotations)
        if (std::find(lanes.begin(), lanes.end(), a.stream_id) == lanes.end()) lanes.push_back(a.stream_id);

    const double lane_h = 36.0;
    const double label_w = 160.0;
    const Scale x{0, duration, kMargin + label_w, kWidth - kMargin};
    std::ostringstream body;
    double y = kMargin;
    for (std::size_t i = 0; i < lanes.size(); ++i) {
        const StreamInfo* info = project.stream(lanes[i]);
        const std::string name = info ? info->name : lanes[i];
        const char* color = kPalette[i % std::size(kPalette)];
        const double base = y + lane_h - 4.0;
        const double top = y + 6.0;
        body << "<g class=\"lane\" data-stream=\"" << xml_escape(lanes[i]) << "\">\n";
        body << "<text x=\"" << num(kMargin) << "\" y=\"" << num(y + lane_h / 2 + 4) << "\">" << xml_escape(name)
             << "</text>\n";
        std::ostringstream path;
        path << "M" << num(x(0)) << " " << num(base);
        for (const auto& a : annotations) {
            if (a.stream_id != lanes[i]) continue;
            path << " H" << num(x(a.t0_ms)) << " V" << num(top) << " H" << num(std::max(x(a.t1_ms), x(a.t0_ms) + 1.0))
                 << " V" << num(base);
        }
        path << " H" << num(x(duration));
        body << "<path class=\"step\" d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
             << "\" stroke-width=\"1.5\"/>\n";
        for (const auto& a : annotations) {
            if (a.stream_id != lanes[i]) continue;
            body << "<rect class=\"annotation\" x=\"" << num(x(a.t0_ms)) << "\" y=\"" << num(top) << "\" width=\""
                 << num(std::max(1.0, x(a.t1_ms) - x(a.t0_ms))) << "\" height=\"" << num(base - top)
                 << "\" fill=\"" << color << "\" fill-opacity=\"0.25\"><title>" << xml_escape(a.text)
                 << "</title></rect>\n";
        }
        body << "</g>\n";
        y += lane_h;
    }
    body << "<text class=\"tick\" x=\"" << num(x.x0) << "\" y=\"" << num(y + kLine) << "\">" << clock(0) << "</text>\n";
    body << "<text class=\"tick\" x=\"" << num(x.x1) << "\" y=\"" << num(y + kLine) << "\" text-anchor=\"end\">"
         << clock(duration) << "</text>\n";
    y += kLine + kMargin;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(y)
        << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(y) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
    return svg.str();
}

}  // namespace sscope
