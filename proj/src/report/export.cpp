#include "sscope/report/export.hpp"

#include <sstream>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/report/annotations.hpp"

namespace sscope {

namespace {

std::string real(double v) { return json(v).dump(); }

struct Row {
    Millis t0, t1;
    std::string label_value;
    std::string probability_unit;
};

Row row_of(const Record& r, const std::optional<std::string>& unit) {
    const std::string u = unit.value_or("");
    return std::visit(
        [&](const auto& rec) -> Row {
            using T = std::decay_t<decltype(rec)>;
            if constexpr (std::is_same_v<T, Sample>) {
                return {rec.t_ms, rec.t_ms, rec.voiced.value_or(true) ? real(rec.value) : std::string{}, u};
            } else if constexpr (std::is_same_v<T, EventSpan>) {
                return {rec.t0_ms, rec.t1_ms, rec.label, real(rec.probability)};
            } else if constexpr (std::is_same_v<T, TextSegment>) {
                return {rec.t0_ms, rec.t1_ms, rec.text, u};
            } else if constexpr (std::is_same_v<T, ThumbRef>) {
                return {rec.t_ms, rec.t_ms, rec.ref, u};
            } else {
                return {rec.t_ms, rec.t_ms, record_to_json(Record{rec})["joints"].dump(), u};
            }
        },
        r);
}

}  // namespace

ExportWhat export_what_from_string(std::string_view text) {
    if (text == "streams") return ExportWhat::streams;
    if (text == "annotations") return ExportWhat::annotations;
    if (text == "transcript") return ExportWhat::transcript;
    throw Error(Errc::invalid_argument, "unknown export target: " + std::string(text),
                "expected streams, annotations or transcript");
}

ExportFormat export_format_from_string(std::string_view text) {
    if (text == "csv") return ExportFormat::csv;
    if (text == "jsonl") return ExportFormat::jsonl;
    throw Error(Errc::invalid_argument, "unknown export format: " + std::string(text), "expected csv or jsonl");
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string export_tabular(const ProjectStore& store, std::string_view project_id, ExportWhat what,
                           ExportFormat format) {
    const Project project = store.project(project_id);
    std::ostringstream os;

    if (what == ExportWhat::annotations) {
        if (format == ExportFormat::csv) os << "id,stream_id,kind,t0_ms,t1_ms,text,author,created_at\n";
        for (const auto& a : list_annotations(store, project_id)) {
            if (format == ExportFormat::jsonl) {
                os << canonical_encode(to_json(a)) << '\n';
            } else {
                os << csv_field(a.id) << ',' << csv_field(a.stream_id) << ',' << to_string(a.kind) << ',' << a.t0_ms
                   << ',' << a.t1_ms << ',' << csv_field(a.text) << ',' << csv_field(a.author) << ','
                   << csv_field(a.created_at) << '\n';
            }
        }
        return os.str();
    }

    if (format == ExportFormat::csv) os << "stream_id,variant,t0_ms,t1_ms,label_value,probability_unit\n";
    for (const auto& info : project.streams) {
        if (what == ExportWhat::transcript && info.filter_id != kTranscriptFilter) continue;
        const DataStream stream = store.load_stream(info.id);
        for (const auto& r : stream.payload) {
            if (format == ExportFormat::jsonl) {
                os << canonical_encode(json{{"stream_id", info.id},
                                            {"variant", to_string(info.variant)},
                                            {"unit", info.unit ? json(*info.unit) : json(nullptr)},
                                            {"record", record_to_json(r)}})
                   << '\n';
            } else {
                const Row row = row_of(r, info.unit);
                os << csv_field(info.id) << ',' << to_string(info.variant) << ',' << row.t0 << ',' << row.t1 << ','
                   << csv_field(row.label_value) << ',' << csv_field(row.probability_unit) << '\n';
            }
        }
    }
    return os.str();
}

std::vector<ExportedRecord> parse_stream_export(std::string_view jsonl) {
    std::vector<ExportedRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) end = jsonl.size();
        const std::string_view line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            ExportedRecord e;
            e.stream_id = j.at("stream_id").get<std::string>();
            e.variant = stream_variant_from_string(j.at("variant").get<std::string>());
            if (j.contains("unit") && j["unit"].is_string()) e.unit = j["unit"].get<std::string>();
            e.record = record_from_json(j.at("record"));
            out.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw Error(Errc::invalid_argument, "malformed export at line " + std::to_string(line_no), ex.what());
        }
    }
    return out;
}

std::vector<Annotation> parse_annotation_export(std::string_view jsonl) {
    std::vector<Annotation> out;
    std::istringstream in{std::string(jsonl)};
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(annotation_from_json(json::parse(line)));
        } catch (const json::exception& ex) {
            throw Error(Errc::invalid_argument, "malformed export at line " + std::to_string(line_no), ex.what());
        }
    }
    return out;
}

}  // namespace sscope
