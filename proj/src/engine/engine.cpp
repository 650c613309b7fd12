#include "sscope/engine/engine.hpp"

#include <algorithm>
#include <random>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/core/stream_ops.hpp"
#include "sscope/engine/plugin_host.hpp"

namespace fs = std::filesystem;

namespace sscope {

// ---------------------------------------------------------------- descriptors

json to_json(const FilterDescriptor& d) {
    json kinds = json::array();
    for (auto k : d.input_kinds) kinds.push_back(to_string(k));
    json outputs = json::array();
    for (const auto& o : d.outputs)
        outputs.push_back({{"stream", o.stream}, {"variant", to_string(o.variant)},
                           {"unit", o.unit ? json(*o.unit) : json(nullptr)}});
    json j{{"filter_id", d.filter_id},
           {"display_name", d.display_name},
           {"model_id", d.model_id},
           {"model_version", d.model_version},
           {"params", d.params},
           {"input_kinds", kinds},
           {"depends_on", d.depends_on},
           {"outputs", outputs},
           {"execution", d.execution == ExecutionKind::builtin ? "builtin" : "plugin"},
           {"windowed", d.windowed}};
    if (d.execution == ExecutionKind::plugin) j["command"] = d.command;
    return j;
}

FilterDescriptor filter_descriptor_from_json(const json& j, const fs::path& base_dir) {
    FilterDescriptor d;
    try {
        d.filter_id = j.at("filter_id").get<std::string>();
        d.display_name = j.value("display_name", d.filter_id);
        d.model_id = j.at("model_id").get<std::string>();
        d.model_version = j.at("model_version").get<std::string>();
        d.params = j.value("params", json::object());
        for (const auto& k : j.value("input_kinds", json::array()))
            d.input_kinds.push_back(recording_kind_from_string(k.get<std::string>()));
        d.depends_on = j.value("depends_on", std::vector<std::string>{});
        for (const auto& o : j.value("outputs", json::array())) {
            OutputSpec spec;
            spec.stream = o.at("stream").get<std::string>();
            spec.variant = stream_variant_from_string(o.value("variant", std::string{"event"}));
            if (o.contains("unit") && o["unit"].is_string()) spec.unit = o["unit"].get<std::string>();
            d.outputs.push_back(std::move(spec));
        }
        const std::string execution = j.value("execution", std::string{"plugin"});
        if (execution != "builtin" && execution != "plugin")
            throw Error(Errc::invalid_argument, "unknown execution kind: " + execution);
        d.execution = execution == "builtin" ? ExecutionKind::builtin : ExecutionKind::plugin;
        for (const auto& part : j.value("command", json::array())) {
            std::string arg = part.get<std::string>();
            for (std::size_t at; (at = arg.find("{dir}")) != std::string::npos;)
                arg.replace(at, 5, base_dir.empty() ? std::string(".") : base_dir.string());
            d.command.push_back(std::move(arg));
        }
        d.windowed = j.value("windowed", false);
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_argument, "malformed filter descriptor", e.what());
    }
    if (d.filter_id.empty()) throw Error(Errc::invalid_argument, "filter descriptor without filter_id");
    return d;
}

fs::path FilterContext::recording_path(RecordingKind kind) const {
    auto it = inputs.find(kind);
    if (it == inputs.end()) throw Error(Errc::failed_precondition, "missing input: " + std::string(to_string(kind)));
    const Recording& r = it->second;
    fs::path p = data_dir / r.blob;
    if (r.metadata.contains("file")) p /= r.metadata["file"].get<std::string>();
    return p;
}

std::vector<Record> FilterContext::dependency_stream(const std::string& filter_id, const std::string& stream) const {
    auto it = dependencies.find(filter_id);
    if (it == dependencies.end()) throw Error(Errc::internal, "dependency not resolved: " + filter_id);
    return cache->load(it->second.stream(stream));
}

// ---------------------------------------------------------------- jobs

std::string_view to_string(JobState state) noexcept {
    switch (state) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
    case JobState::cached: return "cached";
    }
    return "queued";
}

JobState job_state_from_string(std::string_view text) {
    for (JobState s : {JobState::queued, JobState::running, JobState::done, JobState::failed, JobState::cached})
        if (to_string(s) == text) return s;
    throw Error(Errc::invalid_argument, "unknown job state: " + std::string(text));
}

json to_json(const Job& job) {
    return json{{"job_id", job.job_id},
                {"project_id", job.project_id},
                {"recording_id", job.recording_id},
                {"filter_id", job.filter_id},
                {"state", to_string(job.state)},
                {"progress", job.progress},
                {"produced_stream_ids", job.produced_stream_ids},
                {"error", job.error ? json(*job.error) : json(nullptr)},
                {"diagnostics", job.diagnostics},
                {"overrides", job.overrides},
                {"cache_key", job.cache_key},
                {"created_at", job.created_at}};
}

Job job_from_json(const json& j) {
    Job job;
    job.job_id = j.at("job_id").get<std::string>();
    job.project_id = j.at("project_id").get<std::string>();
    job.recording_id = j.at("recording_id").get<std::string>();
    job.filter_id = j.at("filter_id").get<std::string>();
    job.state = job_state_from_string(j.at("state").get<std::string>());
    job.progress = j.value("progress", 0.0);
    job.produced_stream_ids = j.value("produced_stream_ids", std::vector<std::string>{});
    if (j.contains("error") && j["error"].is_string()) job.error = j["error"].get<std::string>();
    job.diagnostics = j.value("diagnostics", std::string{});
    job.overrides = j.value("overrides", json::object());
    job.cache_key = j.value("cache_key", std::string{});
    job.created_at = j.value("created_at", std::string{});
    return job;
}

json to_json(const JobEvent& e) {
    json j{{"type", e.type}, {"progress", e.progress}};
    if (!e.stream_ids.empty()) j["stream_ids"] = e.stream_ids;
    if (!e.message.empty()) j["message"] = e.message;
    return j;
}

namespace {

ParamOverrides overrides_from_json(const json& j) {
    ParamOverrides out;
    for (const auto& [k, v] : j.items()) out[k] = v;
    return out;
}

json overrides_to_json(const ParamOverrides& o) {
    json j = json::object();
    for (const auto& [k, v] : o) j[k] = v;
    return j;
}

std::string new_job_id() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    return derived_id("j-", {std::to_string(rng()), utc_now_iso8601()});
}

std::string error_text(const std::exception& e, std::string* detail) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        if (detail) *detail = err->detail();
    }
    return e.what();
}

}  // namespace

// ---------------------------------------------------------------- engine

struct Engine::Plan {
    FilterDescriptor descriptor;
    FilterFn fn;
    json params;
    std::map<RecordingKind, Recording> inputs;
    std::vector<Plan> deps;
    CacheKey key;
    std::string key_hex;
};

Engine::Engine(ProjectStore& store, EngineConfig config)
    : store_(store), config_(std::move(config)), cache_(config_.data_dir) {
    if (config_.workers == 0) config_.workers = 1;
    fs::create_directories(config_.data_dir / "jobs");
    register_builtin_filters(*this);
    if (fs::is_directory(config_.data_dir / "plugins")) load_plugin_descriptors(config_.data_dir / "plugins");
    for (const auto& dir : config_.plugin_dirs) load_plugin_descriptors(dir);
    recover();
    if (config_.start_workers)
        for (std::size_t i = 0; i < config_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Engine::~Engine() { shutdown(); }

void Engine::shutdown() {
    {
        std::lock_guard lock(jobs_mu_);
        stopping_ = true;
    }
    jobs_cv_.notify_all();
    for (auto& w : workers_)
        if (w.joinable()) w.join();
    workers_.clear();
    std::lock_guard lock(jobs_mu_);
    for (auto& [_, feed] : project_feeds_) feed->close();
}

FilterFn Engine::plugin_adapter(const FilterDescriptor& d) const {
    return [d, timeout = config_.handshake_timeout, every = config_.checkpoint_every](FilterContext& ctx) {
        PluginSpec spec{d.command, timeout, every};
        json paths = json::object();
        for (const auto& [kind, _] : ctx.inputs) paths[std::string(to_string(kind))] = ctx.recording_path(kind).string();
        const json config{{"type", "config"},
                          {"recording_paths", paths},
                          {"params", ctx.params},
                          {"t0_ms", 0},
                          {"t1_ms", ctx.duration_ms}};
        PluginRun run = host_plugin(spec, config, ctx.duration_ms, ctx.staging_dir, {ctx.progress, ctx.checkpoint});
        if (d.windowed) {
            const Millis window = ctx.params.value("window_ms", Millis{1000});
            const Millis hop = ctx.params.value("hop_ms", Millis{500});
            for (const auto& out : run.outputs)
                if (out.variant == StreamVariant::event) validate_window_grid(out, window, hop, ctx.duration_ms);
        }
        for (auto& out : run.outputs) {
            out.info["plugin"] = run.descriptor;
        }
        return std::move(run.outputs);
    };
}

void Engine::register_filter(FilterDescriptor descriptor, FilterFn fn) {
    if (descriptor.execution == ExecutionKind::plugin) {
        if (descriptor.command.empty()) throw Error(Errc::not_found, "plugin not found: empty command");
        resolve_executable(descriptor.command.front());
        if (!fn) fn = plugin_adapter(descriptor);
    } else if (!fn) {
        throw Error(Errc::invalid_argument, "builtin filter " + descriptor.filter_id + " has no implementation");
    }
    std::lock_guard lock(filters_mu_);
    for (const auto& dep : descriptor.depends_on)
        if (!filters_.contains(dep))
            throw Error(Errc::not_found, "filter " + descriptor.filter_id + " depends on unknown filter " + dep);
    if (filters_.contains(descriptor.filter_id))
        throw Error(Errc::conflict, "already registered: " + descriptor.filter_id);
    const std::string id = descriptor.filter_id;
    filters_.emplace(id, Registered{std::move(descriptor), std::move(fn)});
}

void Engine::load_plugin_descriptors(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Errc::not_found, "plugin directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        json j;
        try {
            j = json::parse(read_file(file));
        } catch (const json::exception& e) {
            throw Error(Errc::invalid_argument, "malformed plugin descriptor " + file.string(), e.what());
        }
        register_filter(filter_descriptor_from_json(j, fs::absolute(dir)));
    }
}

std::vector<FilterDescriptor> Engine::catalog() const {
    std::lock_guard lock(filters_mu_);
    std::vector<FilterDescriptor> out;
    for (const auto& [_, r] : filters_) out.push_back(r.descriptor);
    return out;
}

FilterDescriptor Engine::descriptor(std::string_view filter_id) const {
    std::lock_guard lock(filters_mu_);
    auto it = filters_.find(filter_id);
    if (it == filters_.end()) throw Error(Errc::not_found, "unknown filter: " + std::string(filter_id));
    return it->second.descriptor;
}

Engine::Plan Engine::make_plan(const Project& project, const Recording& anchor, const std::string& filter_id,
                               const ParamOverrides& overrides, int depth) const {
    if (depth > 16) throw Error(Errc::failed_precondition, "filter dependency chain too deep at " + filter_id);
    Plan plan;
    {
        std::lock_guard lock(filters_mu_);
        auto it = filters_.find(filter_id);
        if (it == filters_.end()) throw Error(Errc::not_found, "unknown filter: " + filter_id);
        plan.descriptor = it->second.descriptor;
        plan.fn = it->second.fn;
    }
    const FilterDescriptor& d = plan.descriptor;

    plan.params = d.params;
    if (auto all = overrides.find("*"); all != overrides.end())
        for (const auto& [k, v] : all->second.items())
            if (plan.params.contains(k)) plan.params[k] = v;
    if (auto own = overrides.find(filter_id); own != overrides.end()) plan.params.merge_patch(own->second);

    for (RecordingKind kind : d.input_kinds) {
        const Recording* r = anchor.kind == kind ? &anchor : project.first_of(kind);
        if (!r) throw Error(Errc::failed_precondition, "missing input: " + std::string(to_string(kind)));
        plan.inputs.emplace(kind, *r);
    }
    json dep_keys = json::array();
    for (const auto& dep : d.depends_on) {
        plan.deps.push_back(make_plan(project, anchor, dep, overrides, depth + 1));
        dep_keys.push_back(plan.deps.back().key_hex);
    }

    if (plan.inputs.size() == 1) {
        plan.key.recording_digest = plan.inputs.begin()->second.content_digest;
    } else {
        std::string joined;
        for (const auto& [kind, r] : plan.inputs) joined += std::string(to_string(kind)) + "=" + r.content_digest + ";";
        plan.key.recording_digest = sha256_hex(joined);
    }
    plan.key.model_id = d.model_id;
    plan.key.model_version = d.model_version;
    plan.key.params_digest = canonical_hash(json{{"filter", d.filter_id}, {"params", plan.params}, {"inputs", dep_keys}});
    plan.key_hex = plan.key.hex();
    return plan;
}

CacheKey Engine::plan_key(const std::string& project_id, const std::string& recording_id, const std::string& filter_id,
                          const ParamOverrides& overrides) const {
    const Project project = store_.project(project_id);
    const Recording* anchor = project.recording(recording_id);
    if (!anchor) throw Error(Errc::not_found, "unknown recording: " + recording_id);
    return make_plan(project, *anchor, filter_id, overrides, 0).key;
}

CacheEntry Engine::execute(const Plan& plan, const Project& project, const std::string& job_id) {
    return cache_.get_or_run(plan.key, [&](const fs::path& staging) {
        FilterContext ctx;
        ctx.project = project;
        ctx.inputs = plan.inputs;
        ctx.duration_ms = project.session_duration();
        ctx.params = plan.params;
        ctx.data_dir = config_.data_dir;
        ctx.staging_dir = staging;
        ctx.cache = &cache_;
        for (const auto& dep : plan.deps) ctx.dependencies.emplace(dep.descriptor.filter_id, execute(dep, project, {}));
        if (!job_id.empty()) {
            ctx.progress = [this, job_id](double f) { publish(job_id, JobEvent{"progress", f, {}, {}}); };
            ctx.checkpoint = [this, job_id](const std::string& stream, std::size_t records) {
                publish(job_id, JobEvent{"partial", 0.0, {}, stream + ":" + std::to_string(records)});
            };
        }
        std::vector<FilterOutput> outputs = plan.fn(ctx);
        for (const auto& out : outputs) {
            DataStream probe;
            probe.variant = out.variant;
            probe.payload = out.records;
            if (auto problem = check_stream(probe, ctx.duration_ms))
                throw Error(Errc::internal, "filter " + plan.descriptor.filter_id + " produced an invalid stream " +
                                                out.name + ": " + *problem);
        }
        return outputs;
    });
}

std::vector<std::string> Engine::register_streams(const Project& project, const Recording& anchor,
                                                  const std::string& filter_id, const CacheEntry& entry) {
    std::vector<std::string> ids;
    for (const auto& cs : entry.streams) {
        StreamInfo info;
        info.id = derived_id("s-", {project.id, entry.key_hex, cs.name});
        info.project_id = project.id;
        info.recording_id = anchor.id;
        info.filter_id = filter_id;
        info.name = cs.name;
        info.variant = cs.variant;
        info.unit = cs.unit;
        info.path = cs.file;
        info.record_count = cs.record_count;
        info.cache_key = entry.key_hex;
        info.info = cs.info;
        store_.put_stream(info);
        ids.push_back(info.id);
        project_feed(project.id)->publish(json{{"type", "stream-updated"}, {"stream_id", info.id}});
    }
    return ids;
}

std::vector<Job> Engine::schedule(const std::string& project_id, const std::string& recording_id,
                                  const std::vector<std::string>& filter_ids, const ParamOverrides& overrides) {
    const Project project = store_.project(project_id);
    const Recording* anchor = project.recording(recording_id);
    if (!anchor) throw Error(Errc::not_found, "unknown recording: " + recording_id);
    {
        std::lock_guard lock(filters_mu_);
        for (const auto& f : filter_ids)
            if (!filters_.contains(f)) throw Error(Errc::not_found, "unknown filter: " + f);
    }

    std::vector<Job> scheduled;
    for (const auto& filter_id : filter_ids) {
        Job job;
        job.job_id = new_job_id();
        job.project_id = project_id;
        job.recording_id = recording_id;
        job.filter_id = filter_id;
        job.overrides = overrides_to_json(overrides);
        job.created_at = utc_now_iso8601();
        JobEvent terminal;
        try {
            const Plan plan = make_plan(project, *anchor, filter_id, overrides, 0);
            job.cache_key = plan.key_hex;
            if (auto entry = cache_.lookup(plan.key_hex)) {
                job.state = JobState::cached;
                job.progress = 1.0;
                job.produced_stream_ids = register_streams(project, *anchor, filter_id, *entry);
                terminal = JobEvent{"cached", 1.0, job.produced_stream_ids, {}};
            }
        } catch (const Error& e) {
            job.state = JobState::failed;
            job.error = e.what();
            job.diagnostics = e.detail();
            terminal = JobEvent{"failed", 0.0, {}, e.what()};
        }
        persist(job);
        {
            std::lock_guard lock(jobs_mu_);
            auto feed = std::make_shared<JobFeed>([](const JobEvent& e) { return e.terminal(); });
            feeds_.emplace(job.job_id, feed);
            jobs_.emplace(job.job_id, job);
            if (job.state == JobState::queued) queue_.push_back(job.job_id);
        }
        if (job.state != JobState::queued) publish(job.job_id, terminal);
        project_feed(project_id)->publish(json{{"type", "job"}, {"job", to_json(job)}});
        scheduled.push_back(job);
    }
    jobs_cv_.notify_all();
    return scheduled;
}

Job Engine::job(std::string_view job_id) const {
    std::lock_guard lock(jobs_mu_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw Error(Errc::not_found, "unknown job: " + std::string(job_id));
    return it->second;
}

std::vector<Job> Engine::jobs(std::string_view project_id) const {
    std::lock_guard lock(jobs_mu_);
    std::vector<Job> out;
    for (const auto& [_, j] : jobs_)
        if (j.project_id == project_id) out.push_back(j);
    std::sort(out.begin(), out.end(), [](const Job& a, const Job& b) {
        return std::tie(a.created_at, a.job_id) < std::tie(b.created_at, b.job_id);
    });
    return out;
}

Engine::JobFeed::Subscription Engine::subscribe(std::string_view job_id) {
    std::shared_ptr<JobFeed> feed;
    {
        std::lock_guard lock(jobs_mu_);
        auto it = feeds_.find(job_id);
        if (it == feeds_.end()) throw Error(Errc::not_found, "unknown job: " + std::string(job_id));
        feed = it->second;
    }
    return feed->subscribe();
}

std::shared_ptr<Engine::ProjectFeed> Engine::project_feed(const std::string& project_id) {
    std::lock_guard lock(jobs_mu_);
    auto& feed = project_feeds_[project_id];
    if (!feed) feed = std::make_shared<ProjectFeed>();
    return feed;
}

Engine::ProjectFeed::Subscription Engine::subscribe_project(const std::string& project_id) {
    if (!store_.has_project(project_id)) throw Error(Errc::not_found, "unknown project: " + project_id);
    return project_feed(project_id)->subscribe();
}

Job Engine::wait(std::string_view job_id, std::chrono::milliseconds timeout) {
    std::unique_lock lock(jobs_mu_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw Error(Errc::not_found, "unknown job: " + std::string(job_id));
    jobs_cv_.wait_for(lock, timeout, [&] { return it->second.terminal(); });
    return it->second;
}

void Engine::persist(const Job& job) const {
    write_file_atomic(config_.data_dir / "jobs" / (job.job_id + ".json"), to_json(job).dump(2));
}

void Engine::update_job(const std::string& job_id, const std::function<void(Job&)>& change) {
    Job copy;
    {
        std::lock_guard lock(jobs_mu_);
        Job& job = jobs_.at(job_id);
        change(job);
        copy = job;
    }
    persist(copy);
    jobs_cv_.notify_all();
    project_feed(copy.project_id)->publish(json{{"type", "job"}, {"job", to_json(copy)}});
}

void Engine::publish(const std::string& job_id, JobEvent event) {
    std::shared_ptr<JobFeed> feed;
    {
        std::lock_guard lock(jobs_mu_);
        auto it = jobs_.find(job_id);
        if (it == jobs_.end()) return;
        if (event.type == "progress") {
            // Progress only moves forward.
            if (event.progress <= it->second.progress && !(event.progress == 0.0 && it->second.progress == 0.0)) return;
            event.progress = std::max(event.progress, it->second.progress);
            it->second.progress = event.progress;
        } else {
            event.progress = std::max(event.progress, it->second.progress);
        }
        feed = feeds_.at(job_id);
    }
    feed->publish(std::move(event));
}

void Engine::worker_loop() {
    while (true) {
        std::string job_id;
        {
            std::unique_lock lock(jobs_mu_);
            jobs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            job_id = queue_.front();
            queue_.pop_front();
        }
        run_job(job_id);
    }
}

void Engine::run_job(const std::string& job_id) {
    update_job(job_id, [](Job& j) {
        j.state = JobState::running;
        j.progress = 0.0;
    });
    publish(job_id, JobEvent{"progress", 0.0, {}, {}});
    const Job job = this->job(job_id);
    try {
        const Project project = store_.project(job.project_id);
        const Recording* anchor = project.recording(job.recording_id);
        if (!anchor) throw Error(Errc::not_found, "unknown recording: " + job.recording_id);
        const Plan plan = make_plan(project, *anchor, job.filter_id, overrides_from_json(job.overrides), 0);
        const CacheEntry entry = execute(plan, project, job_id);
        const auto ids = register_streams(project, *anchor, job.filter_id, entry);
        publish(job_id, JobEvent{"progress", 1.0, {}, {}});
        update_job(job_id, [&](Job& j) {
            j.state = JobState::done;
            j.progress = 1.0;
            j.produced_stream_ids = ids;
            j.cache_key = plan.key_hex;
        });
        publish(job_id, JobEvent{"done", 1.0, ids, {}});
    } catch (const std::exception& e) {
        std::string detail;
        const std::string message = error_text(e, &detail);
        update_job(job_id, [&](Job& j) {
            j.state = JobState::failed;
            j.error = message;
            j.diagnostics = detail;
        });
        publish(job_id, JobEvent{"failed", 0.0, {}, message});
    }
}

void Engine::recover() {
    std::vector<Job> loaded;
    for (const auto& entry : fs::directory_iterator(config_.data_dir / "jobs")) {
        if (entry.path().extension() != ".json") continue;
        try {
            loaded.push_back(job_from_json(json::parse(read_file(entry.path()))));
        } catch (const std::exception&) {
            // unreadable job file: skip
        }
    }
    std::sort(loaded.begin(), loaded.end(), [](const Job& a, const Job& b) {
        return std::tie(a.created_at, a.job_id) < std::tie(b.created_at, b.job_id);
    });
    std::vector<std::string> resumed;
    {
        std::lock_guard lock(jobs_mu_);
        for (auto& job : loaded) {
            auto feed = std::make_shared<JobFeed>([](const JobEvent& e) { return e.terminal(); });
            if (job.state == JobState::queued || job.state == JobState::running) {
                job.state = JobState::queued;
                job.progress = 0.0;
                queue_.push_back(job.job_id);
                resumed.push_back(job.job_id);
            } else if (job.state == JobState::failed) {
                feed->publish(JobEvent{"failed", job.progress, {}, job.error.value_or("")});
            } else {
                feed->publish(JobEvent{std::string(to_string(job.state)), 1.0, job.produced_stream_ids, {}});
            }
            feeds_.emplace(job.job_id, feed);
            jobs_.emplace(job.job_id, job);
        }
    }
    for (const auto& id : resumed) persist(job(id));
}

DataStream Engine::classify_windows(const std::string& project_id, const std::string& recording_id,
                                    const std::string& filter_id, Millis window_ms, Millis hop_ms) {
    if (!descriptor(filter_id).windowed) throw Error(Errc::invalid_argument, filter_id + " is not a windowed classifier");
    ParamOverrides overrides{{filter_id, json{{"window_ms", window_ms}, {"hop_ms", hop_ms}}}};
    const auto scheduled = schedule(project_id, recording_id, {filter_id}, overrides);
    const Job done = wait(scheduled.front().job_id);
    if (done.state == JobState::failed) throw Error(Errc::plugin, done.error.value_or("classification failed"), done.diagnostics);
    if (done.produced_stream_ids.empty()) throw Error(Errc::internal, "classifier produced no streams");
    return store_.load_stream(done.produced_stream_ids.front());
}

void validate_window_grid(const FilterOutput& output, Millis window_ms, Millis hop_ms, Millis duration_ms) {
    if (window_ms <= 0 || hop_ms <= 0) throw Error(Errc::invalid_argument, "window_ms and hop_ms must be positive");
    for (std::size_t i = 0; i < output.records.size(); ++i) {
        const auto* e = std::get_if<EventSpan>(&output.records[i]);
        if (!e) continue;
        const Millis expected_end = std::min(e->t0_ms + window_ms, duration_ms);
        if (e->t0_ms % hop_ms != 0 || e->t1_ms != expected_end)
            throw Error(Errc::plugin, "plugin emitted invalid sample: event " + std::to_string(i) +
                                          " is not on the window grid");
    }
}

}  // namespace sscope
