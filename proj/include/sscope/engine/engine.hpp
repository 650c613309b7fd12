#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sscope/engine/feed.hpp"
#include "sscope/engine/result_cache.hpp"
#include "sscope/store/project_store.hpp"

namespace sscope {

enum class ExecutionKind { builtin, plugin };

struct OutputSpec {
    std::string stream;
    StreamVariant variant = StreamVariant::continuous;
    std::optional<std::string> unit;
};

// (model_id, model_version, params) together with the inputs determine the
// output. `depends_on` names filters whose cached results this one reads;
// a filter sharing its producer's model therefore reuses the producer's
// cache entry instead of re-running the model.
struct FilterDescriptor {
    std::string filter_id;
    std::string display_name;
    std::string model_id;
    std::string model_version;
    json params = json::object();
    std::vector<RecordingKind> input_kinds;
    std::vector<std::string> depends_on;
    std::vector<OutputSpec> outputs;
    ExecutionKind execution = ExecutionKind::builtin;
    std::vector<std::string> command;  // plugin argv; "{dir}" expands to the descriptor's directory
    bool windowed = false;             // rolling-window classifier: params carry window_ms / hop_ms
};

json to_json(const FilterDescriptor& d);
FilterDescriptor filter_descriptor_from_json(const json& j, const std::filesystem::path& base_dir = {});

struct FilterContext {
    Project project;
    std::map<RecordingKind, Recording> inputs;
    Millis duration_ms = 0;
    json params = json::object();
    std::map<std::string, CacheEntry> dependencies;
    std::filesystem::path data_dir;
    std::filesystem::path staging_dir;
    std::function<void(double)> progress;
    std::function<void(const std::string&, std::size_t)> checkpoint;
    const ResultCache* cache = nullptr;

    // Absolute path of the stored media (a file, or a directory for frame sequences).
    std::filesystem::path recording_path(RecordingKind kind) const;
    std::vector<Record> dependency_stream(const std::string& filter_id, const std::string& stream) const;
};

using FilterFn = std::function<std::vector<FilterOutput>(FilterContext&)>;

enum class JobState { queued, running, done, failed, cached };

std::string_view to_string(JobState state) noexcept;
JobState job_state_from_string(std::string_view text);

struct Job {
    std::string job_id;
    std::string project_id;
    std::string recording_id;
    std::string filter_id;
    JobState state = JobState::queued;
    double progress = 0.0;
    std::vector<std::string> produced_stream_ids;
    std::optional<std::string> error;
    std::string diagnostics;
    json overrides = json::object();
    std::string cache_key;
    std::string created_at;

    bool terminal() const noexcept {
        return state == JobState::done || state == JobState::failed || state == JobState::cached;
    }
};

json to_json(const Job& job);
Job job_from_json(const json& j);

struct JobEvent {
    std::string type;  // progress | partial | done | failed | cached
    double progress = 0.0;
    std::vector<std::string> stream_ids;
    std::string message;

    bool terminal() const noexcept { return type == "done" || type == "failed" || type == "cached"; }
};

json to_json(const JobEvent& event);

// Per-filter parameter overrides. Entries under a filter id are merged into
// that filter's params; entries under "*" replace same-named params of every
// filter that declares them.
using ParamOverrides = std::map<std::string, json>;

struct EngineConfig {
    std::filesystem::path data_dir;
    std::size_t workers = 2;
    std::size_t checkpoint_every = 500;
    std::chrono::milliseconds handshake_timeout{10000};
    std::vector<std::filesystem::path> plugin_dirs;  // <data>/plugins is always scanned
    bool start_workers = true;
};

// Filter catalog, FIFO job queue with a worker pool, per-job event feeds and
// the result cache. Jobs are persisted under <data>/jobs/; on construction
// queued or running jobs from a previous process are re-queued.
class Engine {
public:
    using JobFeed = Feed<JobEvent>;
    using ProjectFeed = Feed<json>;

    Engine(ProjectStore& store, EngineConfig config);
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    // Builtins pass their implementation; plugin descriptors get a host
    // adapter. Throws "already registered" / "plugin not found".
    void register_filter(FilterDescriptor descriptor, FilterFn fn = {});
    void load_plugin_descriptors(const std::filesystem::path& dir);
    std::vector<FilterDescriptor> catalog() const;
    FilterDescriptor descriptor(std::string_view filter_id) const;

    // One job per filter, returned without waiting. Cache hits come back
    // already `cached`; filters whose inputs are missing come back `failed`
    // with "missing input: <kind>". Unknown project/recording/filter throw.
    std::vector<Job> schedule(const std::string& project_id,
                              const std::string& recording_id,
                              const std::vector<std::string>& filter_ids,
                              const ParamOverrides& overrides = {});

    Job job(std::string_view job_id) const;
    std::vector<Job> jobs(std::string_view project_id) const;
    JobFeed::Subscription subscribe(std::string_view job_id);
    ProjectFeed::Subscription subscribe_project(const std::string& project_id);

    // Blocks until the job is terminal or the timeout passes.
    Job wait(std::string_view job_id, std::chrono::milliseconds timeout = std::chrono::hours(24));

    // The cache key a schedule with these arguments would use.
    CacheKey plan_key(const std::string& project_id,
                      const std::string& recording_id,
                      const std::string& filter_id,
                      const ParamOverrides& overrides = {}) const;

    // Runs a windowed classifier filter over the recording and returns its
    // first output stream.
    DataStream classify_windows(const std::string& project_id,
                                const std::string& recording_id,
                                const std::string& filter_id,
                                Millis window_ms,
                                Millis hop_ms);

    ResultCache& cache() noexcept { return cache_; }
    ProjectStore& store() noexcept { return store_; }
    const EngineConfig& config() const noexcept { return config_; }

    // Stops taking jobs, lets running ones finish, joins the workers.
    void shutdown();

private:
    struct Registered {
        FilterDescriptor descriptor;
        FilterFn fn;
    };
    struct Plan;

    Plan make_plan(const Project& project, const Recording& anchor, const std::string& filter_id,
                   const ParamOverrides& overrides, int depth) const;
    CacheEntry execute(const Plan& plan, const Project& project, const std::string& job_id);
    std::vector<std::string> register_streams(const Project& project, const Recording& anchor,
                                              const std::string& filter_id, const CacheEntry& entry);
    void run_job(const std::string& job_id);
    void worker_loop();
    void recover();
    void persist(const Job& job) const;
    void update_job(const std::string& job_id, const std::function<void(Job&)>& change);
    void publish(const std::string& job_id, JobEvent event);
    std::shared_ptr<ProjectFeed> project_feed(const std::string& project_id);
    FilterFn plugin_adapter(const FilterDescriptor& d) const;

    ProjectStore& store_;
    EngineConfig config_;
    ResultCache cache_;

    mutable std::mutex filters_mu_;
    std::map<std::string, Registered, std::less<>> filters_;

    mutable std::mutex jobs_mu_;
    std::condition_variable jobs_cv_;
    std::map<std::string, Job, std::less<>> jobs_;
    std::map<std::string, std::shared_ptr<JobFeed>, std::less<>> feeds_;
    std::map<std::string, std::shared_ptr<ProjectFeed>, std::less<>> project_feeds_;
    std::deque<std::string> queue_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

// Registers pitch, speech_rate, skeleton, joint_angles, e_divisive and thumbnails.
void register_builtin_filters(Engine& engine);

// Checks that window-classifier events sit on the [k*hop, k*hop + window)
// grid (clipped at duration). Throws Error(plugin, ...) otherwise.
void validate_window_grid(const FilterOutput& output, Millis window_ms, Millis hop_ms, Millis duration_ms);

}  // namespace sscope
