#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "sscope/core/error.hpp"
#include "sscope/engine/engine.hpp"
#include "sscope/ingest/ingest.hpp"
#include "sscope/report/annotations.hpp"
#include "sscope/report/export.hpp"
#include "sscope/report/svg.hpp"
#include "sscope/server/api_server.hpp"

namespace fs = std::filesystem;
using namespace sscope;

namespace {

struct Options {
    std::string data_dir;
    std::string project = "default";
    std::size_t workers = 2;
    std::vector<std::string> plugin_dirs;
};

json parse_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        return text;
    }
}

// "key=value" applies to every filter declaring `key`; "filter.key=value"
// to one filter.
ParamOverrides parse_overrides(const std::vector<std::string>& params, std::optional<std::uint64_t> seed) {
    ParamOverrides out;
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) throw Error(Errc::invalid_argument, "expected key=value, got " + p);
        const std::string key = p.substr(0, eq);
        const json value = parse_value(p.substr(eq + 1));
        const auto dot = key.find('.');
        if (dot == std::string::npos)
            out["*"][key] = value;
        else
            out[key.substr(0, dot)][key.substr(dot + 1)] = value;
    }
    if (seed) out["*"]["seed"] = *seed;
    return out;
}

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    f << text;
    if (!f) throw Error(Errc::io, "cannot write " + out_path);
}

EngineConfig engine_config(const Options& o) {
    EngineConfig c;
    c.data_dir = o.data_dir;
    c.workers = o.workers;
    for (const auto& d : o.plugin_dirs) c.plugin_dirs.emplace_back(d);
    return c;
}

ProjectStore open_store(const Options& o) {
    fs::create_directories(o.data_dir);
    return ProjectStore(o.data_dir);
}

int cmd_ingest(const Options& o, const std::vector<std::string>& paths, const std::string& kind) {
    ProjectStore store = open_store(o);
    if (!store.has_project(o.project)) store.create_project(o.project);
    for (const auto& p : paths) {
        const RecordingKind k = kind.empty() ? guess_recording_kind(p) : recording_kind_from_string(kind);
        const Recording r = ingest_recording(store, o.project, p, k);
        std::cout << r.id << '\t' << to_string(r.kind) << '\t' << r.duration_ms << " ms\t" << p << '\n';
    }
    return 0;
}

const Recording* anchor_for(const Project& project, const FilterDescriptor& d, const std::string& recording_id) {
    if (!recording_id.empty()) {
        const Recording* r = project.recording(recording_id);
        if (!r) throw Error(Errc::not_found, "unknown recording: " + recording_id);
        return r;
    }
    for (auto kind : d.input_kinds)
        if (const Recording* r = project.first_of(kind)) return r;
    if (project.recordings.empty()) throw Error(Errc::failed_precondition, "project has no recordings");
    return &project.recordings.front();
}

int cmd_run(const Options& o, const std::vector<std::string>& filters, const std::string& recording_id,
            const ParamOverrides& overrides) {
    ProjectStore store = open_store(o);
    Engine engine(store, engine_config(o));
    const Project project = store.project(o.project);

    std::vector<Job> jobs;
    for (const auto& f : filters) {
        const FilterDescriptor d = engine.descriptor(f);
        const Recording* anchor = anchor_for(project, d, recording_id);
        for (auto& j : engine.schedule(project.id, anchor->id, {f}, overrides)) jobs.push_back(std::move(j));
    }

    std::map<std::string, int> shown;
    bool pending = true;
    while (pending) {
        pending = false;
        for (auto& job : jobs) {
            if (!job.terminal()) job = engine.wait(job.job_id, std::chrono::milliseconds(200));
            const int pct = static_cast<int>(job.progress * 100.0 + 0.5);
            auto it = shown.find(job.job_id);
            if (job.state == JobState::running && (it == shown.end() || it->second != pct)) {
                std::cout << job.filter_id << ": " << pct << "%\n" << std::flush;
                shown[job.job_id] = pct;
            }
            if (!job.terminal()) pending = true;
        }
    }

    int failed = 0;
    std::size_t cached = 0;
    for (const auto& job : jobs) {
        if (job.state == JobState::failed) {
            ++failed;
            std::cerr << job.filter_id << ": failed: " << job.error.value_or("unknown error");
            if (!job.diagnostics.empty()) std::cerr << " (" << job.diagnostics.substr(0, 300) << ")";
            std::cerr << '\n';
            continue;
        }
        if (job.state == JobState::cached) ++cached;
        std::cout << job.filter_id << ": " << to_string(job.state);
        for (const auto& id : job.produced_stream_ids) std::cout << ' ' << id;
        std::cout << '\n';
    }
    if (!jobs.empty() && cached == jobs.size()) std::cout << "all cached\n";
    engine.shutdown();
    return failed == 0 ? 0 : 1;
}

int cmd_filters(const Options& o) {
    ProjectStore store = open_store(o);
    EngineConfig c = engine_config(o);
    c.start_workers = false;
    Engine engine(store, c);
    for (const auto& d : engine.catalog()) {
        std::cout << d.filter_id << '\t' << d.model_id << '@' << d.model_version << '\t'
                  << (d.execution == ExecutionKind::builtin ? "builtin" : "plugin") << '\t' << d.display_name << '\n';
    }
    return 0;
}

int cmd_streams(const Options& o) {
    ProjectStore store = open_store(o);
    for (const auto& s : store.project(o.project).streams)
        std::cout << s.id << '\t' << s.filter_id << '\t' << s.name << '\t' << to_string(s.variant) << '\t'
                  << s.record_count << '\t' << s.path << '\n';
    return 0;
}

int cmd_serve(const Options& o, const std::string& host, int port, const std::string& static_dir) {
    ServerConfig c;
    c.host = host;
    c.port = port;
    c.data_dir = o.data_dir;
    c.workers = o.workers;
    for (const auto& d : o.plugin_dirs) c.plugin_dirs.emplace_back(d);
    if (!static_dir.empty()) c.static_dir = static_dir;

    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    ApiServer server(std::move(c));
    const int bound = server.bind();
    std::cout << "listening on http://" << host << ':' << bound << '\n' << std::flush;
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        server.stop();
    });
    server.serve();
    // Wake the waiter if the server stopped for another reason.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sscope: session recording analysis"};
    app.require_subcommand(1);
    Options o;
    const char* env_dir = std::getenv("SSCOPE_DATA");
    o.data_dir = env_dir ? env_dir : "sscope-data";
    app.add_option("--data-dir", o.data_dir, "data directory")->capture_default_str();
    app.add_option("--project", o.project, "project id")->capture_default_str();
    app.add_option("--workers", o.workers, "worker threads")->capture_default_str();
    app.add_option("--plugin-dir", o.plugin_dirs, "extra plugin descriptor directory");

    auto* ingest = app.add_subcommand("ingest", "add recordings to the project");
    std::vector<std::string> paths;
    std::string kind;
    ingest->add_option("paths", paths, "wav file, transcript or frame directory")->required();
    ingest->add_option("--kind", kind, "audio-wav | frame-sequence | transcript");

    auto* run = app.add_subcommand("run", "run filters and wait for them");
    std::string filter_list;
    std::string recording_id;
    std::vector<std::string> params;
    std::optional<std::uint64_t> seed;
    run->add_option("--filters", filter_list, "comma-separated filter ids")->required();
    run->add_option("--recording", recording_id, "recording id (default: first of the filter's input kind)");
    run->add_option("--params", params, "key=value or filter.key=value");
    run->add_option("--seed", seed, "seed for randomized filters");

    auto* exp = app.add_subcommand("export", "export streams, annotations or transcript");
    std::string what = "streams";
    std::string format = "csv";
    std::string out_path;
    exp->add_option("--what", what)->capture_default_str();
    exp->add_option("--format", format)->capture_default_str();
    exp->add_option("--out", out_path, "output file (default stdout)");

    auto* annotate = app.add_subcommand("annotate", "create an annotation");
    AnnotationDraft draft;
    std::optional<Millis> t1;
    std::string annotation_kind;
    annotate->add_option("--stream", draft.stream_id)->required();
    annotate->add_option("--t0", draft.t0_ms)->required();
    annotate->add_option("--t1", t1);
    annotate->add_option("--text", draft.text);
    annotate->add_option("--author", draft.author);
    annotate->add_option("--kind", annotation_kind, "point | interval");

    auto* annotlette = app.add_subcommand("annotlette", "write the SVG report of one annotation");
    std::string annotation_id;
    Millis pad = kDefaultContextPad;
    std::string svg_out;
    annotlette->add_option("annotation", annotation_id)->required();
    annotlette->add_option("--pad", pad, "context pad in ms")->capture_default_str();
    annotlette->add_option("--out", svg_out, "output file (default stdout)");

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--static-dir", static_dir, "web client directory served at /");

    auto* filters = app.add_subcommand("filters", "list registered filters");
    auto* streams = app.add_subcommand("streams", "list the project's streams");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(o, paths, kind);
        if (*run) {
            std::vector<std::string> ids;
            std::stringstream ss(filter_list);
            for (std::string id; std::getline(ss, id, ',');)
                if (!id.empty()) ids.push_back(id);
            if (ids.empty()) throw Error(Errc::invalid_argument, "no filters given");
            return cmd_run(o, ids, recording_id, parse_overrides(params, seed));
        }
        if (*exp) {
            ProjectStore store = open_store(o);
            write_output(out_path, export_tabular(store, o.project, export_what_from_string(what),
                                                  export_format_from_string(format)));
            return 0;
        }
        if (*annotate) {
            ProjectStore store = open_store(o);
            draft.t1_ms = t1.value_or(draft.t0_ms);
            draft.kind = annotation_kind.empty()
                             ? (draft.t0_ms == draft.t1_ms ? AnnotationKind::point : AnnotationKind::interval)
                             : annotation_kind_from_string(annotation_kind);
            const Annotation a = create_annotation(store, o.project, draft);
            std::cout << a.id << '\n';
            return 0;
        }
        if (*annotlette) {
            ProjectStore store = open_store(o);
            write_output(svg_out, annotlette_svg(store, annotation_id, pad));
            return 0;
        }
        if (*serve) return cmd_serve(o, host, port, static_dir);
        if (*filters) return cmd_filters(o);
        if (*streams) return cmd_streams(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what();
        if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
        std::cerr << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
