#include "sscope/server/api_server.hpp"

#include <sys/socket.h>

#include <atomic>
#include <charconv>

#include <httplib.h>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/core/stream_ops.hpp"
#include "sscope/ingest/ingest.hpp"
#include "sscope/report/annotations.hpp"
#include "sscope/report/export.hpp"
#include "sscope/report/svg.hpp"

namespace fs = std::filesystem;

namespace sscope {

namespace {

constexpr const char* kJson = "application/json";

int status_for(Errc code) {
    switch (code) {
    case Errc::invalid_argument: return 400;
    case Errc::not_found: return 404;
    case Errc::conflict: return 409;
    case Errc::failed_precondition: return 412;
    case Errc::unsupported: return 415;
    case Errc::unreadable: return 422;
    case Errc::plugin: return 502;
    case Errc::io:
    case Errc::internal: return 500;
    }
    return 500;
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, Errc code, const std::string& message, const std::string& detail = {}) {
    send_json(res, json{{"code", errc_name(code)}, {"message", message}, {"detail", detail}}, status_for(code));
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_argument, "malformed request body", e.what());
    }
}

std::optional<Millis> query_millis(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    const std::string text = req.get_param_value(name);
    Millis v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(Errc::invalid_argument, std::string("bad query parameter ") + name, text);
    return v;
}

const std::set<std::string, std::less<>> kTelemetryKinds = {"play", "pause", "seek", "rate-change", "brush",
                                                             "filter-toggle"};

json stream_page(const ProjectStore& store, const httplib::Request& req, const std::string& stream_id) {
    const StreamInfo info = store.stream_info(stream_id);
    const Project project = store.project(info.project_id);
    DataStream stream = store.load_stream(stream_id);
    Millis end = project.session_duration();
    for (const auto& r : stream.payload) end = std::max(end, record_end(r));

    const Millis from = query_millis(req, "from").value_or(0);
    const Millis to = query_millis(req, "to").value_or(end);
    if (req.has_param("agg")) {
        if (stream.variant != StreamVariant::continuous)
            throw Error(Errc::invalid_argument, "aggregation needs a continuous stream");
        const Millis width = query_millis(req, "width").value_or(1000);
        const Millis hop = query_millis(req, "hop").value_or(width);
        if (width <= 0 || hop <= 0) throw Error(Errc::invalid_argument, "width and hop must be positive");
        stream = window_aggregate(stream, std::max<Millis>(end, 1), width, hop,
                                  aggregator_from_string(req.get_param_value("agg")));
    }
    const DataStream slice = slice_stream(stream, from, to);
    const Millis offset = query_millis(req, "offset").value_or(0);
    const Millis limit = query_millis(req, "limit").value_or(static_cast<Millis>(slice.payload.size()));
    if (offset < 0 || limit < 0) throw Error(Errc::invalid_argument, "offset and limit must be non-negative");

    json records = json::array();
    const auto total = static_cast<Millis>(slice.payload.size());
    for (Millis i = offset; i < std::min(total, offset + limit); ++i)
        records.push_back(record_to_json(slice.payload[static_cast<std::size_t>(i)]));
    return json{{"stream", to_json(info)}, {"from", from},         {"to", to},
                {"total", total},          {"offset", offset},     {"records", records}};
}

}  // namespace

struct ApiServer::Impl {
    ServerConfig config;
    ProjectStore store;
    Engine engine;
    httplib::Server http;
    std::atomic<bool> stopping{false};
    bool bound = false;

    std::mutex idem_mu;
    std::map<std::string, std::shared_ptr<std::mutex>> idem_locks;

    explicit Impl(ServerConfig c)
        : config(std::move(c)),
          store(config.data_dir),
          engine(store, EngineConfig{config.data_dir, config.workers, config.checkpoint_every,
                                     config.handshake_timeout, config.plugin_dirs, true}) {
        routes();
    }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    Handler guarded(Handler h) {
        return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const Error& e) {
                send_error(res, e.code(), e.what(), e.detail());
            } catch (const json::exception& e) {
                send_error(res, Errc::invalid_argument, "malformed request", e.what());
            } catch (const std::exception& e) {
                send_error(res, Errc::internal, e.what());
            }
        };
    }

    // Replays the stored response for a repeated Idempotency-Key.
    Handler idempotent(Handler h) {
        return [this, h = guarded(std::move(h))](const httplib::Request& req, httplib::Response& res) {
            std::string key = req.get_header_value("Idempotency-Key");
            if (key.empty()) key = req.get_header_value("X-Request-Id");
            if (key.empty()) return h(req, res);
            std::shared_ptr<std::mutex> lock;
            {
                std::lock_guard g(idem_mu);
                auto& slot = idem_locks[key];
                if (!slot) slot = std::make_shared<std::mutex>();
                lock = slot;
            }
            std::lock_guard g(*lock);
            const fs::path file = config.data_dir / "idempotency" / (sha256_hex(key) + ".json");
            const std::string scope = req.method + " " + req.path;
            if (fs::exists(file)) {
                const json saved = json::parse(read_file(file));
                if (saved.at("scope") != scope) {
                    send_error(res, Errc::conflict, "idempotency key reused for a different request", scope);
                    return;
                }
                res.status = saved.at("status").get<int>();
                res.set_content(saved.at("body").get<std::string>(), saved.at("content_type").get<std::string>());
                res.set_header("Idempotent-Replay", "true");
                return;
            }
            h(req, res);
            if (res.status < 500) {
                fs::create_directories(file.parent_path());
                write_file_atomic(file, json{{"scope", scope},
                                             {"status", res.status},
                                             {"body", res.body},
                                             {"content_type", res.get_header_value("Content-Type")}}
                                            .dump());
            }
        };
    }

    template <typename Feed, typename Encode>
    void serve_feed(httplib::Response& res, typename Feed::Subscription subscription, Encode encode) {
        auto sub = std::make_shared<typename Feed::Subscription>(std::move(subscription));
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, sub, encode](std::size_t, httplib::DataSink& sink) {
            if (stopping) return false;
            auto event = sub->next(std::chrono::milliseconds(1000));
            if (!event) {
                if (sub->finished()) {
                    sink.done();
                    return true;
                }
                const std::string ping = ": keepalive\n\n";
                return sink.write(ping.data(), ping.size());
            }
            const std::string frame = encode(*event);
            if (!sink.write(frame.data(), frame.size())) return false;
            if (sub->finished()) sink.done();
            return true;
        });
    }

    void routes() {
        using Req = httplib::Request;
        using Res = httplib::Response;
        auto& s = http;

        s.Get("/healthz", guarded([](const Req&, Res& res) { send_json(res, json{{"status", "ok"}}); }));

        s.Post("/projects", idempotent([this](const Req& req, Res& res) {
            const json body = parse_body(req);
            std::optional<std::string> id;
            if (body.contains("project_id") && body["project_id"].is_string()) id = body["project_id"].get<std::string>();
            const Project p = store.create_project(id);
            send_json(res, json{{"project_id", p.id}}, 201);
        }));
        s.Get("/projects", guarded([this](const Req&, Res& res) { send_json(res, store.project_ids()); }));
        s.Get(R"(/projects/([^/]+))", guarded([this](const Req& req, Res& res) {
            send_json(res, to_json(store.project(req.matches[1].str())));
        }));

        s.Post(R"(/projects/([^/]+)/recordings)", idempotent([this](const Req& req, Res& res) {
            const std::string project_id = req.matches[1].str();
            UploadFiles files;
            std::string kind_text;
            if (req.is_multipart_form_data()) {
                for (const auto& [name, part] : req.files) {
                    if (name == "kind" && part.filename.empty()) {
                        kind_text = part.content;
                    } else if (!part.filename.empty()) {
                        files[fs::path(part.filename).filename().string()] = part.content;
                    }
                }
            } else {
                kind_text = req.get_param_value("kind");
                std::string filename = req.get_param_value("filename");
                if (filename.empty()) filename = "upload";
                files[fs::path(filename).filename().string()] = req.body;
            }
            if (kind_text.empty()) throw Error(Errc::invalid_argument, "missing recording kind");
            const Recording r = ingest_files(store, project_id, files, recording_kind_from_string(kind_text));
            send_json(res, to_json(r), 201);
        }));
        s.Get(R"(/projects/([^/]+)/recordings)", guarded([this](const Req& req, Res& res) {
            json out = json::array();
            for (const auto& r : store.project(req.matches[1].str()).recordings) out.push_back(to_json(r));
            send_json(res, out);
        }));

        s.Get("/filters", guarded([this](const Req&, Res& res) {
            json out = json::array();
            for (const auto& d : engine.catalog()) out.push_back(to_json(d));
            send_json(res, out);
        }));

        s.Post(R"(/projects/([^/]+)/jobs)", idempotent([this](const Req& req, Res& res) {
            const json body = parse_body(req);
            ParamOverrides overrides;
            const json params = body.value("params", json::object());
            for (const auto& [k, v] : params.items()) {
                if (!v.is_object()) throw Error(Errc::invalid_argument, "params." + k + " must be an object");
                overrides[k] = v;
            }
            const auto jobs = engine.schedule(req.matches[1].str(), body.at("recording_id").get<std::string>(),
                                              body.at("filter_ids").get<std::vector<std::string>>(), overrides);
            json out = json::array();
            for (const auto& j : jobs) out.push_back(to_json(j));
            send_json(res, out, 202);
        }));
        s.Get(R"(/projects/([^/]+)/jobs)", guarded([this](const Req& req, Res& res) {
            const std::string project_id = req.matches[1].str();
            store.project(project_id);
            json out = json::array();
            for (const auto& j : engine.jobs(project_id)) out.push_back(to_json(j));
            send_json(res, out);
        }));
        s.Get(R"(/jobs/([^/]+))", guarded([this](const Req& req, Res& res) {
            send_json(res, to_json(engine.job(req.matches[1].str())));
        }));
        s.Get(R"(/jobs/([^/]+)/events)", guarded([this](const Req& req, Res& res) {
            const std::string job_id = req.matches[1].str();
            serve_feed<Engine::JobFeed>(res, engine.subscribe(job_id), [job_id](const JobEvent& e) {
                json data = to_json(e);
                data["job_id"] = job_id;
                return "event: " + e.type + "\ndata: " + data.dump() + "\n\n";
            });
        }));
        s.Get(R"(/projects/([^/]+)/events)", guarded([this](const Req& req, Res& res) {
            serve_feed<Engine::ProjectFeed>(res, engine.subscribe_project(req.matches[1].str()), [](const json& e) {
                return "event: " + e.value("type", std::string{"message"}) + "\ndata: " + e.dump() + "\n\n";
            });
        }));

        s.Get(R"(/projects/([^/]+)/streams)", guarded([this](const Req& req, Res& res) {
            json out = json::array();
            for (const auto& info : store.project(req.matches[1].str()).streams) out.push_back(to_json(info));
            send_json(res, out);
        }));
        s.Get(R"(/streams/([^/]+))", guarded([this](const Req& req, Res& res) {
            send_json(res, stream_page(store, req, req.matches[1].str()));
        }));

        s.Post(R"(/projects/([^/]+)/annotations)", idempotent([this](const Req& req, Res& res) {
            const Annotation a = create_annotation(store, req.matches[1].str(), annotation_draft_from_json(parse_body(req)));
            send_json(res, to_json(a), 201);
        }));
        s.Get(R"(/projects/([^/]+)/annotations)", guarded([this](const Req& req, Res& res) {
            json out = json::array();
            for (const auto& a : list_annotations(store, req.matches[1].str())) out.push_back(to_json(a));
            send_json(res, out);
        }));
        auto owned = [this](const Req& req) {
            Annotation a = store.annotation(req.matches[2].str());
            if (a.project_id != req.matches[1].str())
                throw Error(Errc::not_found, "unknown annotation: " + req.matches[2].str());
            return a;
        };
        s.Get(R"(/projects/([^/]+)/annotations/([^/]+))", guarded([owned](const Req& req, Res& res) {
            send_json(res, to_json(owned(req)));
        }));
        s.Patch(R"(/projects/([^/]+)/annotations/([^/]+))", idempotent([this, owned](const Req& req, Res& res) {
            const Annotation a = owned(req);
            send_json(res, to_json(update_annotation(store, a.id, annotation_patch_from_json(parse_body(req)))));
        }));
        s.Delete(R"(/projects/([^/]+)/annotations/([^/]+))", idempotent([this, owned](const Req& req, Res& res) {
            store.delete_annotation(owned(req).id);
            res.status = 204;
        }));
        s.Get(R"(/annotations/([^/]+)/annotlette\.svg)", guarded([this](const Req& req, Res& res) {
            const Millis pad = query_millis(req, "pad").value_or(kDefaultContextPad);
            res.set_content(annotlette_svg(store, req.matches[1].str(), pad), "image/svg+xml");
        }));
        s.Get(R"(/projects/([^/]+)/annotations\.svg)", guarded([this](const Req& req, Res& res) {
            res.set_content(annotations_overview_svg(store, req.matches[1].str()), "image/svg+xml");
        }));

        s.Get(R"(/projects/([^/]+)/export)", guarded([this](const Req& req, Res& res) {
            const auto what = export_what_from_string(req.has_param("what") ? req.get_param_value("what") : "streams");
            const auto format = export_format_from_string(req.has_param("format") ? req.get_param_value("format") : "csv");
            res.set_content(export_tabular(store, req.matches[1].str(), what, format),
                            format == ExportFormat::csv ? "text/csv" : "application/x-ndjson");
        }));

        s.Post(R"(/projects/([^/]+)/telemetry)", idempotent([this](const Req& req, Res& res) {
            const std::string project_id = req.matches[1].str();
            const Project project = store.project(project_id);
            const json body = parse_body(req);
            const json events = body.is_array() ? body : json::array({body});
            std::vector<EventSpan> spans;
            for (const auto& e : events) {
                const std::string kind = e.at("kind").get<std::string>();
                if (!kTelemetryKinds.contains(kind)) throw Error(Errc::invalid_argument, "unknown telemetry kind: " + kind);
                const Millis t = e.at("t_video_ms").get<Millis>();
                if (t < 0 || t > project.session_duration())
                    throw Error(Errc::invalid_argument, "out-of-range timestamp", std::to_string(t));
                EventSpan span{t, t, kind, 1.0, {}};
                if (e.contains("payload") && !e["payload"].is_null()) span.meta = canonical_encode(e["payload"]);
                spans.push_back(std::move(span));
            }
            json sequences = json::array();
            for (const auto& span : spans) sequences.push_back(store.append_telemetry(project_id, span));
            send_json(res, json{{"accepted", spans.size()}, {"sequences", sequences}}, 202);
        }));

        if (config.static_dir) {
            if (!http.set_mount_point("/", config.static_dir->string()))
                throw Error(Errc::not_found, "static directory not found: " + config.static_dir->string());
        } else {
            s.Get("/", guarded([](const Req&, Res& res) { send_json(res, json{{"service", "sscope"}}); }));
        }

        s.set_exception_handler([](const Req&, Res& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                send_error(res, Errc::internal, e.what());
            }
        });
        s.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
        });
    }
};

namespace {

void check_writable(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = dir / ".write-probe";
    try {
        write_file_atomic(probe, "ok");
        fs::remove(probe);
    } catch (const std::exception& e) {
        throw Error(Errc::io, "unwritable data dir", dir.string() + ": " + e.what());
    }
}

}  // namespace

ApiServer::ApiServer(ServerConfig config) {
    if (config.data_dir.empty()) throw Error(Errc::invalid_argument, "data dir required");
    check_writable(config.data_dir);
    impl_ = std::make_unique<Impl>(std::move(config));
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
    auto& c = impl_->config;
    if (c.port == 0) {
        const int port = impl_->http.bind_to_any_port(c.host);
        if (port < 0) throw Error(Errc::io, "port in use", c.host);
        c.port = port;
    } else if (!impl_->http.bind_to_port(c.host, c.port)) {
        throw Error(Errc::io, "port in use", c.host + ":" + std::to_string(c.port));
    }
    impl_->bound = true;
    return c.port;
}

void ApiServer::serve() {
    if (!impl_->bound) throw Error(Errc::failed_precondition, "serve() before bind()");
    impl_->http.listen_after_bind();
}

void ApiServer::stop() {
    if (!impl_ || impl_->stopping.exchange(true)) return;
    impl_->http.stop();
    impl_->engine.shutdown();
}

Engine& ApiServer::engine() { return impl_->engine; }
ProjectStore& ApiServer::store() { return impl_->store; }

}  // namespace sscope
