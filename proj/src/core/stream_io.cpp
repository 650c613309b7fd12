#include "sscope/core/stream_io.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"

namespace sscope {

json record_to_json(const Record& record) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, Sample>) {
                json j{{"t_ms", r.t_ms}, {"value", r.value}};
                if (r.voiced) j["voiced"] = *r.voiced;
                return j;
            } else if constexpr (std::is_same_v<T, EventSpan>) {
                json j{{"t0_ms", r.t0_ms}, {"t1_ms", r.t1_ms}, {"label", r.label}, {"p", r.probability}};
                if (!r.meta.empty()) j["meta"] = r.meta;
                return j;
            } else if constexpr (std::is_same_v<T, TextSegment>) {
                return json{{"t0_ms", r.t0_ms}, {"t1_ms", r.t1_ms}, {"text", r.text}, {"words", r.word_count}};
            } else if constexpr (std::is_same_v<T, ThumbRef>) {
                return json{{"t_ms", r.t_ms}, {"ref", r.ref}};
            } else {
                json joints = json::object();
                for (const auto& [name, p] : r.joints) joints[name] = json::array({p[0], p[1], p[2]});
                return json{{"t_ms", r.t_ms}, {"joints", joints}, {"complete", r.complete}};
            }
        },
        record);
}

Record record_from_json(const json& j) {
    if (!j.is_object()) throw Error(Errc::invalid_argument, "record must be an object");
    if (j.contains("value")) {
        Sample s;
        s.t_ms = j.at("t_ms").get<Millis>();
        s.value = j.at("value").get<double>();
        if (j.contains("voiced")) s.voiced = j.at("voiced").get<bool>();
        return s;
    }
    if (j.contains("label")) {
        EventSpan e;
        e.t0_ms = j.at("t0_ms").get<Millis>();
        e.t1_ms = j.at("t1_ms").get<Millis>();
        e.label = j.at("label").get<std::string>();
        e.probability = j.at("p").get<double>();
        e.meta = j.value("meta", std::string{});
        return e;
    }
    if (j.contains("text")) {
        TextSegment t;
        t.t0_ms = j.at("t0_ms").get<Millis>();
        t.t1_ms = j.at("t1_ms").get<Millis>();
        t.text = j.at("text").get<std::string>();
        t.word_count = j.contains("words") ? j.at("words").get<int>() : count_words(t.text);
        return t;
    }
    if (j.contains("ref")) return ThumbRef{j.at("t_ms").get<Millis>(), j.at("ref").get<std::string>()};
    if (j.contains("joints")) {
        PoseFrame f;
        f.t_ms = j.at("t_ms").get<Millis>();
        for (const auto& [name, p] : j.at("joints").items())
            f.joints[name] = Point3{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
        f.complete = j.value("complete", true);
        return f;
    }
    throw Error(Errc::invalid_argument, "unrecognized record: " + j.dump());
}

std::string encode_records(const std::vector<Record>& records) {
    std::string out;
    for (const Record& r : records) {
        out += canonical_encode(record_to_json(r));
        out += '\n';
    }
    return out;
}

std::vector<Record> decode_records(std::string_view text) {
    std::vector<Record> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(Errc::unreadable, "malformed stream record at line " + std::to_string(line_no),
                        e.what());
        }
    }
    return records;
}

std::vector<Record> read_stream_file(const std::filesystem::path& path) {
    return decode_records(read_file(path));
}

void write_stream_file(const std::filesystem::path& path, const std::vector<Record>& records) {
    write_file_atomic(path, encode_records(records));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::not_found, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    thread_local std::mt19937_64 rng{std::random_device{}()};
    auto tmp = path;
    tmp += ".tmp" + std::to_string(rng() & 0xffffff);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw Error(Errc::io, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace sscope
