#include <doctest.h>

#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/core/stream_ops.hpp"
#include "sscope/engine/engine.hpp"
#include "sscope/engine/plugin_host.hpp"
#include "sscope/engine/result_cache.hpp"
#include "sscope/ingest/ingest.hpp"
#include "sscope/store/project_store.hpp"

using namespace sscope;
using sscope::testing::TempDir;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

CacheKey key_of(const std::string& tag) { return CacheKey{sha256_hex(tag), "m", "1", canonical_hash(json::object())}; }

FilterOutput samples_output(std::size_t n) {
    FilterOutput out;
    out.name = "x";
    for (std::size_t i = 0; i < n; ++i) out.records.push_back(Sample{static_cast<Millis>(i), static_cast<double>(i), {}});
    return out;
}

json mock_descriptor(const std::string& filter_id, const std::string& mode) {
    return json{{"filter_id", filter_id},
                {"model_id", "mock-emotion"},
                {"model_version", "1"},
                {"input_kinds", {"frame-sequence"}},
                {"outputs", {{{"stream", "emotion"}, {"variant", "event"}}}},
                {"params", {{"window_ms", 1000}, {"hop_ms", 500}}},
                {"windowed", true},
                {"command", {SSCOPE_MOCK_PLUGIN, "--mode", mode, "--delay-ms", "20"}}};
}

json mock_config(const fs::path& frames, Millis t1) {
    return json{{"type", "config"},
                {"recording_paths", {{"frame-sequence", frames.string()}}},
                {"params", {{"window_ms", 1000}, {"hop_ms", 500}}},
                {"t0_ms", 0},
                {"t1_ms", t1}};
}

struct Workspace {
    TempDir data;
    TempDir media;
    ProjectStore store{data.path()};
    Recording audio, frames, transcript;

    Workspace() {
        store.create_project("p");
        sscope::testing::write_wav(media / "a.wav", sscope::testing::sine(220, 16000, 2.0), 16000);
        audio = ingest_recording(store, "p", media / "a.wav", RecordingKind::audio_wav);
        sscope::testing::write_frame_sequence(media / "frames", 120, 30.0, [](std::size_t k) {
            return sscope::testing::skeleton_with_elbow(90.0 + 60.0 * std::sin(static_cast<double>(k) / 5.0));
        });
        frames = ingest_recording(store, "p", media / "frames", RecordingKind::frame_sequence);
    }

    EngineConfig config(std::size_t workers = 1) const {
        EngineConfig c;
        c.data_dir = data.path();
        c.workers = workers;
        return c;
    }
};

Job run_one(Engine& engine, const std::string& recording, const std::string& filter, const ParamOverrides& o = {}) {
    const auto jobs = engine.schedule("p", recording, {filter}, o);
    REQUIRE(jobs.size() == 1);
    return engine.wait(jobs[0].job_id, 60s);
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("project store persists and reloads") {
    TempDir data;
    std::string stream_id;
    {
        ProjectStore store(data.path());
        store.create_project("p");
        CHECK(store.has_project("p"));
        CHECK_THROWS_AS(store.project("nope"), Error);
        sscope::testing::write_text(data / "s.jsonl", encode_records({Sample{0, 1.0, {}}, Sample{10, 2.0, {}}}));
        StreamInfo info;
        info.id = "s-1";
        info.project_id = "p";
        info.name = "x";
        info.path = "s.jsonl";
        info.record_count = 2;
        store.put_stream(info);
        store.put_stream(info);
        stream_id = info.id;
        CHECK(store.project("p").streams.size() == 1);
    }
    ProjectStore reloaded(data.path());
    CHECK(reloaded.has_project("p"));
    CHECK(reloaded.load_stream(stream_id).payload.size() == 2);
    CHECK(derived_id("s-", {"a", "b"}) == derived_id("s-", {"a", "b"}));
    CHECK(derived_id("s-", {"a", "b"}) != derived_id("s-", {"ab", ""}));
}

TEST_CASE("result cache runs once, persists, and forgets failures") {
    TempDir data;
    ResultCache cache(data.path());
    const CacheKey k = key_of("one");
    int runs = 0;
    const auto runner = [&](const fs::path&) {
        ++runs;
        return std::vector<FilterOutput>{samples_output(5)};
    };
    const CacheEntry a = cache.get_or_run(k, runner);
    const CacheEntry b = cache.get_or_run(k, runner);
    CHECK(runs == 1);
    CHECK(cache.executions(k.hex()) == 1);
    REQUIRE(a.streams.size() == 1);
    CHECK(a.streams[0].file == b.streams[0].file);
    CHECK(cache.load(a.streams[0]).size() == 5);

    ResultCache reopened(data.path());
    CHECK(reopened.contains(k.hex()));
    reopened.get_or_run(k, runner);
    CHECK(runs == 1);

    const CacheKey bad = key_of("bad");
    CHECK_THROWS_AS(cache.get_or_run(bad, [](const fs::path&) -> std::vector<FilterOutput> {
        throw Error(Errc::internal, "boom");
    }), Error);
    CHECK_FALSE(cache.contains(bad.hex()));
}

TEST_CASE("result cache deduplicates concurrent requests") {
    TempDir data;
    ResultCache cache(data.path());
    const CacheKey k = key_of("concurrent");
    std::atomic<int> runs{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&] {
            cache.get_or_run(k, [&](const fs::path&) {
                ++runs;
                std::this_thread::sleep_for(50ms);
                return std::vector<FilterOutput>{samples_output(3)};
            });
        });
    for (auto& t : threads) t.join();
    CHECK(runs.load() == 1);
}

TEST_CASE("plugin host: neutral run, progress, checkpoints") {
    TempDir frames, staging;
    sscope::testing::write_frame_sequence(frames.path(), 30, 30.0);
    std::vector<double> progress;
    std::size_t checkpoints = 0;
    PluginSpec spec{{SSCOPE_MOCK_PLUGIN, "--mode", "neutral"}, 10s, 4};
    PluginCallbacks cb;
    cb.progress = [&](double f) { progress.push_back(f); };
    cb.checkpoint = [&](const std::string&, std::size_t) { ++checkpoints; };
    const PluginRun run = host_plugin(spec, mock_config(frames.path(), 10000), 10000, staging.path(), cb);
    REQUIRE(run.outputs.size() == 1);
    CHECK(run.outputs[0].name == "emotion");
    CHECK(run.outputs[0].records.size() == 20);
    CHECK(progress == std::vector<double>{0.25, 0.5, 0.75, 1.0});
    CHECK(checkpoints == 5);
    CHECK_FALSE(fs::exists(staging / "emotion.partial.jsonl"));
}

TEST_CASE("plugin host rejects invalid output and crashes") {
    TempDir frames;
    sscope::testing::write_frame_sequence(frames.path(), 30, 30.0);
    const auto failure = [&](const std::string& mode, std::chrono::milliseconds handshake = 10s) {
        TempDir staging;
        PluginSpec spec{{SSCOPE_MOCK_PLUGIN, "--mode", mode}, handshake, 2};
        std::string message;
        try {
            host_plugin(spec, mock_config(frames.path(), 5000), 5000, staging.path());
            FAIL("plugin run succeeded");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::plugin);
            message = std::string(e.what()) + " | " + e.detail();
        }
        // checkpointed records are all valid
        const auto partial = staging / "emotion.partial.jsonl";
        if (fs::exists(partial)) {
            DataStream s;
            s.variant = StreamVariant::event;
            s.payload = read_stream_file(partial);
            CHECK_FALSE(check_stream(s, 5000).has_value());
        }
        return message;
    };
    CHECK(failure("bad-timestamp").find("timestamp outside [0, 5000]") != std::string::npos);
    CHECK(failure("bad-probability").find("invalid probability") != std::string::npos);
    CHECK(failure("exit1").find("simulated crash in window 3") != std::string::npos);
    CHECK(failure("error").find("mock failure") != std::string::npos);
    CHECK(failure("hang", 300ms).find("handshake timeout") != std::string::npos);
    CHECK_THROWS_AS(resolve_executable("definitely-not-a-real-plugin-binary"), Error);
}

TEST_CASE("engine: builtin catalog and registration errors") {
    Workspace w;
    Engine engine(w.store, w.config());
    std::set<std::string> ids;
    for (const auto& d : engine.catalog()) ids.insert(d.filter_id);
    for (const char* f : {"pitch", "speech_rate", "skeleton", "joint_angles", "e_divisive", "thumbnails"})
        CHECK(ids.contains(f));
    FilterDescriptor dup = engine.descriptor("pitch");
    CHECK_THROWS_WITH_AS(engine.register_filter(dup, [](FilterContext&) { return std::vector<FilterOutput>{}; }),
                         "already registered: pitch", Error);
    CHECK_THROWS_AS(engine.schedule("p", w.audio.id, {"nope"}), Error);
    CHECK_THROWS_AS(engine.schedule("p", "rec-missing", {"pitch"}), Error);
    const auto bad_plugin = filter_descriptor_from_json(json{{"filter_id", "ghost"},
                                                             {"model_id", "g"},
                                                             {"model_version", "1"},
                                                             {"input_kinds", {"audio-wav"}},
                                                             {"command", {"no-such-plugin-xyz"}}});
    CHECK_THROWS_AS(engine.register_filter(bad_plugin), Error);
}

TEST_CASE("engine: cache hits, param changes, byte-identical results") {
    Workspace w;
    Engine engine(w.store, w.config());
    const Job first = run_one(engine, w.audio.id, "pitch");
    REQUIRE(first.state == JobState::done);
    REQUIRE(first.produced_stream_ids.size() == 1);
    const std::size_t executions = engine.cache().total_executions();
    const auto stream_file = w.store.absolute(w.store.stream_info(first.produced_stream_ids[0]).path);
    const std::string bytes = read_file(stream_file);

    const Job second = run_one(engine, w.audio.id, "pitch");
    CHECK(second.state == JobState::cached);
    CHECK(second.produced_stream_ids == first.produced_stream_ids);
    CHECK(engine.cache().total_executions() == executions);
    CHECK(read_file(stream_file) == bytes);
    CHECK(w.store.project("p").streams.size() == 1);

    const Job changed = run_one(engine, w.audio.id, "pitch", {{"pitch", json{{"fmax_hz", 500.0}}}});
    CHECK(changed.state == JobState::done);
    CHECK(engine.cache().total_executions() == executions + 1);
    CHECK(changed.produced_stream_ids != first.produced_stream_ids);
    CHECK(engine.plan_key("p", w.audio.id, "pitch") != engine.plan_key("p", w.audio.id, "pitch", {{"pitch", json{{"fmax_hz", 500.0}}}}));
    CHECK(engine.plan_key("p", w.audio.id, "pitch") == engine.plan_key("p", w.audio.id, "pitch", {{"*", json{{"unrelated", 1}}}}));
}

TEST_CASE("engine: joint angles share the pose model with the skeleton filter") {
    Workspace w;
    Engine engine(w.store, w.config());
    const Job skel = run_one(engine, w.frames.id, "skeleton");
    REQUIRE(skel.state == JobState::done);
    const std::size_t after_skeleton = engine.cache().total_executions();
    const Job angles = run_one(engine, w.frames.id, "joint_angles");
    REQUIRE(angles.state == JobState::done);
    CHECK(engine.cache().total_executions() == after_skeleton + 1);
    const CacheKey skel_key = engine.plan_key("p", w.frames.id, "skeleton");
    CHECK(engine.cache().executions(skel_key.hex()) == 1);

    const Job seg = run_one(engine, w.frames.id, "e_divisive", {{"e_divisive", json{{"min_size", 10}, {"n_permutations", 49}}}});
    REQUIRE(seg.state == JobState::done);
    const DataStream segments = w.store.load_stream(seg.produced_stream_ids.at(0));
    CHECK_FALSE(segments.payload.empty());
    CHECK_FALSE(check_stream(segments, w.frames.duration_ms).has_value());
}

TEST_CASE("engine: missing inputs fail immediately, events and feeds") {
    Workspace w;
    Engine engine(w.store, w.config());
    auto feed = engine.subscribe_project("p");
    const auto failed = engine.schedule("p", w.audio.id, {"speech_rate"});
    REQUIRE(failed.size() == 1);
    CHECK(failed[0].state == JobState::failed);
    CHECK(failed[0].error == std::optional<std::string>("missing input: transcript"));

    const auto jobs = engine.schedule("p", w.audio.id, {"pitch"});
    auto sub = engine.subscribe(jobs[0].job_id);
    double last = -1.0;
    std::string terminal;
    for (int i = 0; i < 1000 && !sub.finished(); ++i) {
        const auto e = sub.next(10s);
        if (!e) break;
        if (e->type == "progress") {
            CHECK(e->progress > last);
            last = e->progress;
        } else if (e->type == "done" || e->type == "failed" || e->type == "cached") {
            terminal = e->type;
        }
    }
    CHECK(terminal == "done");

    bool saw_job = false, saw_stream = false;
    while (const auto e = feed.next(200ms)) {
        saw_job |= (*e)["type"] == "job";
        saw_stream |= (*e)["type"] == "stream-updated";
    }
    CHECK(saw_job);
    CHECK(saw_stream);
    CHECK(engine.jobs("p").size() == 2);
}

TEST_CASE("engine: job states only move along allowed transitions") {
    Workspace w;
    Engine engine(w.store, w.config(2));
    auto feed = engine.subscribe_project("p");
    std::vector<std::string> ids;
    for (double fmax : {500.0, 550.0, 500.0, 600.0, 550.0}) {
        for (const auto& j : engine.schedule("p", w.audio.id, {"pitch"}, {{"pitch", json{{"fmax_hz", fmax}}}}))
            ids.push_back(j.job_id);
    }
    for (const auto& id : ids) engine.wait(id, 60s);

    std::map<std::string, std::vector<std::string>> seen;
    std::map<std::string, double> progress;
    while (const auto e = feed.next(300ms)) {
        if ((*e)["type"] != "job") continue;
        const Job j = job_from_json((*e)["job"]);
        auto& states = seen[j.job_id];
        const std::string st(to_string(j.state));
        if (states.empty() || states.back() != st) states.push_back(st);
        CHECK(j.progress >= progress[j.job_id]);
        progress[j.job_id] = j.progress;
    }
    const std::set<std::vector<std::string>> allowed = {
        {"queued", "running", "done"}, {"queued", "running", "failed"}, {"queued", "cached"}, {"cached"}};
    for (const auto& id : ids) {
        const auto& states = seen[id];
        INFO("job " << id);
        CHECK(allowed.contains(states));
        CHECK(engine.job(id).terminal());
    }
}

TEST_CASE("engine: concurrent identical schedules coalesce onto one execution") {
    Workspace w;
    Engine engine(w.store, w.config(2));
    const auto a = engine.schedule("p", w.audio.id, {"pitch"});
    const auto b = engine.schedule("p", w.audio.id, {"pitch"});
    const Job ja = engine.wait(a[0].job_id, 60s), jb = engine.wait(b[0].job_id, 60s);
    CHECK(engine.cache().executions(engine.plan_key("p", w.audio.id, "pitch").hex()) == 1);
    CHECK(ja.produced_stream_ids == jb.produced_stream_ids);
    CHECK(w.store.project("p").streams.size() == 1);
}

TEST_CASE("engine: queued jobs survive a restart") {
    Workspace w;
    std::string job_id;
    {
        EngineConfig c = w.config();
        c.start_workers = false;
        Engine engine(w.store, c);
        job_id = engine.schedule("p", w.audio.id, {"pitch"})[0].job_id;
        CHECK(engine.job(job_id).state == JobState::queued);
    }
    CHECK(fs::exists(w.data / "jobs" / (job_id + ".json")));
    Engine engine(w.store, w.config());
    const Job done = engine.wait(job_id, 60s);
    CHECK(done.state == JobState::done);
    const Job again = run_one(engine, w.audio.id, "pitch");
    CHECK(again.produced_stream_ids == done.produced_stream_ids);
    CHECK(w.store.project("p").streams.size() == 1);
}

TEST_CASE("engine: plugin descriptors run through the host and are grid-checked") {
    Workspace w;
    TempDir plugins;
    std::ofstream(plugins / "mock.json") << mock_descriptor("emotion", "cycle").dump();
    std::ofstream(plugins / "bad.json") << mock_descriptor("emotion_bad", "bad-probability").dump();
    EngineConfig c = w.config();
    c.plugin_dirs = {plugins.path()};
    Engine engine(w.store, c);
    const Job ok = run_one(engine, w.frames.id, "emotion");
    REQUIRE(ok.state == JobState::done);
    const DataStream s = w.store.load_stream(ok.produced_stream_ids.at(0));
    CHECK(s.payload.size() == window_count(w.frames.duration_ms, 500));
    CHECK_FALSE(check_stream(s, w.frames.duration_ms).has_value());

    const Job bad = run_one(engine, w.frames.id, "emotion_bad");
    CHECK(bad.state == JobState::failed);
    REQUIRE(bad.error);
    CHECK(bad.error->find("invalid probability") != std::string::npos);
    CHECK(bad.produced_stream_ids.empty());

    const DataStream grid = engine.classify_windows("p", w.frames.id, "emotion", 2000, 1000);
    CHECK(grid.payload.size() == window_count(w.frames.duration_ms, 1000));
    for (const auto& r : grid.payload) CHECK(record_start(r) % 1000 == 0);

    FilterOutput off_grid;
    off_grid.variant = StreamVariant::event;
    off_grid.records.push_back(EventSpan{250, 1250, "x", 1.0, {}});
    CHECK_THROWS_AS(validate_window_grid(off_grid, 1000, 500, 4000), Error);
}

}
