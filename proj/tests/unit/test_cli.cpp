#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/engine/engine.hpp"
#include "sscope/ingest/ingest.hpp"
#include "sscope/store/project_store.hpp"

using namespace sscope;
using sscope::testing::ProcessResult;
using sscope::testing::TempDir;

namespace {

ProcessResult cli(const TempDir& data, std::vector<std::string> args) {
    std::vector<std::string> argv{SSCOPE_CLI_PATH, "--data-dir", data.path().string(), "--workers", "1"};
    argv.insert(argv.end(), args.begin(), args.end());
    return sscope::testing::run_process(argv);
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ingest, run, cached rerun, unknown filter, export") {
    TempDir data, media;
    sscope::testing::write_wav(media / "a.wav", sscope::testing::sine(180, 16000, 2.0), 16000);
    sscope::testing::write_text(media / "t.srt", "1\n00:00:00,200 --> 00:00:01,200\none two three\n");

    const auto ing = cli(data, {"ingest", (media / "a.wav").string(), (media / "t.srt").string()});
    REQUIRE(ing.exit_code == 0);
    CHECK(lines(ing.out).size() == 2);
    CHECK(ing.out.find("audio-wav\t2000 ms") != std::string::npos);

    const auto first = cli(data, {"run", "--filters", "pitch,speech_rate"});
    CHECK(first.exit_code == 0);
    CHECK(first.out.find("pitch: done") != std::string::npos);
    CHECK(first.out.find("speech_rate: done") != std::string::npos);
    CHECK(first.out.find("all cached") == std::string::npos);

    const auto second = cli(data, {"run", "--filters", "pitch,speech_rate"});
    CHECK(second.exit_code == 0);
    CHECK(second.out.find("all cached") != std::string::npos);

    const auto unknown = cli(data, {"run", "--filters", "nope"});
    CHECK(unknown.exit_code != 0);
    CHECK(unknown.err.find("unknown filter") != std::string::npos);

    const auto missing = cli(data, {"ingest", (media / "missing.wav").string()});
    CHECK(missing.exit_code != 0);

    const auto streams = cli(data, {"streams"});
    CHECK(lines(streams.out).size() == 3);
    const auto exported = cli(data, {"export", "--what", "streams", "--format", "jsonl"});
    CHECK(exported.exit_code == 0);
    CHECK_FALSE(exported.out.empty());
}

TEST_CASE("CLI and library produce byte-identical stream files") {
    TempDir media, cli_data, lib_data;
    sscope::testing::write_wav(media / "a.wav", sscope::testing::sine(300, 16000, 1.5), 16000);
    REQUIRE(cli(cli_data, {"ingest", (media / "a.wav").string()}).exit_code == 0);
    REQUIRE(cli(cli_data, {"run", "--filters", "pitch"}).exit_code == 0);

    ProjectStore store(lib_data.path());
    store.create_project("default");
    const Recording r = ingest_recording(store, "default", media / "a.wav", RecordingKind::audio_wav);
    EngineConfig c;
    c.data_dir = lib_data.path();
    c.workers = 1;
    Engine engine(store, c);
    const Job job = engine.wait(engine.schedule("default", r.id, {"pitch"})[0].job_id, std::chrono::seconds(60));
    REQUIRE(job.state == JobState::done);

    ProjectStore cli_store(cli_data.path());
    const auto cli_streams = cli_store.project("default").streams;
    REQUIRE(cli_streams.size() == 1);
    CHECK(cli_streams[0].id == job.produced_stream_ids.at(0));
    CHECK(read_file(cli_store.absolute(cli_streams[0].path)) ==
          read_file(store.absolute(store.stream_info(job.produced_stream_ids[0]).path)));
}

}
