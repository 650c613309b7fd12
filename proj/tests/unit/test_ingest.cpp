#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/core/stream_ops.hpp"
#include "sscope/ingest/frames.hpp"
#include "sscope/ingest/ingest.hpp"
#include "sscope/ingest/pose.hpp"
#include "sscope/ingest/transcript.hpp"
#include "sscope/ingest/wav.hpp"

using namespace sscope;
namespace fs = std::filesystem;
using sscope::testing::TempDir;

TEST_SUITE("ingest") {

TEST_CASE("wav: zeros, full-scale square, stereo downmix") {
    const AudioBuffer zeros = decode_wav(encode_wav(std::vector<double>(16000, 0.0), 1, 16000));
    CHECK(zeros.sample_rate_hz == 16000);
    CHECK(zeros.duration_ms() == 1000);

    std::vector<double> square(1000);
    for (std::size_t i = 0; i < square.size(); ++i) square[i] = (i / 50) % 2 ? -1.0 : 1.0;
    for (double v : decode_wav(encode_wav(square, 1, 8000)).samples) CHECK(std::fabs(std::fabs(v) - 1.0) <= 1.0 / 32768);

    std::vector<double> stereo;
    for (int i = 0; i < 100; ++i) {
        stereo.push_back(0.5);
        stereo.push_back(-0.5);
    }
    const AudioBuffer mono = decode_wav(encode_wav(stereo, 2, 8000));
    CHECK(mono.samples.size() == 100);
    for (double v : mono.samples) CHECK(v == 0.0);
}

TEST_CASE("wav: write/read round trip preserves sample values") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> level(-32768, 32767);
    std::vector<double> values(4000);
    for (auto& v : values) v = level(rng) / 32768.0;
    CHECK(decode_wav(encode_wav(values, 1, 22050)).samples == values);

    std::uniform_real_distribution<float> f(-1.0f, 1.0f);
    std::vector<double> floats(3000);
    for (auto& v : floats) v = f(rng);
    CHECK(decode_wav(encode_wav(floats, 1, 44100, PcmEncoding::float32)).samples == floats);
}

TEST_CASE("wav: malformed and compressed inputs") {
    CHECK_THROWS_WITH_AS(decode_wav("RIFF1234WAVEjunk"), "unreadable media", Error);
    CHECK_THROWS_WITH_AS(decode_wav("not audio at all"), "unreadable media", Error);
    std::string bytes = encode_wav(std::vector<double>(100, 0.1), 1, 8000);
    bytes[20] = 0x55;  // MPEG layer 3 format tag
    bytes[21] = 0;
    try {
        decode_wav(bytes);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unsupported);
        CHECK(std::string(e.what()) == "unsupported encoding");
        CHECK(e.detail().find("transcode") != std::string::npos);
    }
}

TEST_CASE("transcript: srt example, empty file, malformed timing") {
    const auto segs = parse_transcript("1\n00:00:01,000 --> 00:00:02,000\nhello world\n", TranscriptFormat::srt);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].t0_ms == 1000);
    CHECK(segs[0].t1_ms == 2000);
    CHECK(segs[0].text == "hello world");
    CHECK(segs[0].word_count == 2);
    CHECK(parse_transcript("", TranscriptFormat::srt).empty());
    CHECK(parse_transcript("WEBVTT\n", TranscriptFormat::vtt).empty());
    CHECK_THROWS_WITH_AS(parse_transcript("1\n00:00:01,000 --> 00:0x:02,000\nhi\n", TranscriptFormat::srt),
                         "malformed timestamp at line 2", Error);
}

TEST_CASE("transcript: overlapping segments are kept and sorted") {
    const auto segs = parse_transcript("2\n00:00:03,000 --> 00:00:04,000\nlater\n\n"
                                       "1\n00:00:01,000 --> 00:00:05,000\nfirst and long\n\n"
                                       "3\n00:00:02,000 --> 00:00:03,500\noverlap\n",
                                       TranscriptFormat::srt);
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].t0_ms == 1000);
    CHECK(segs[1].t0_ms == 2000);
    CHECK(segs[2].t0_ms == 3000);
}

TEST_CASE("transcript: vtt with header blocks and cue ids") {
    const auto segs = parse_transcript("\xEF\xBB\xBFWEBVTT - demo\r\n\r\nNOTE a comment\r\n\r\ncue-1\r\n"
                                       "00:01.500 --> 00:02.000 align:start\r\nhi there\r\n",
                                       TranscriptFormat::vtt);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].t0_ms == 1500);
    CHECK(segs[0].t1_ms == 2000);
    CHECK(segs[0].text == "hi there");
}

TEST_CASE("transcript: serialize/parse round trip on random segments") {
    std::mt19937_64 rng(2);
    for (auto format : {TranscriptFormat::srt, TranscriptFormat::vtt, TranscriptFormat::jsonl}) {
        auto segs = sscope::testing::random_segments(rng, 100, 600000);
        for (auto& s : segs)
            if (s.text.empty()) {
                s.text = "okay";
                s.word_count = 1;
            }
        CHECK(parse_transcript(serialize_transcript(segs, format), format) == segs);
    }
}

TEST_CASE("pose stream: full frames, a missing joint, malformed line") {
    std::string text;
    for (int k = 0; k < 3; ++k) {
        json joints = json::object();
        for (const auto& n : default_joint_names()) joints[n] = {k, 1.0, 2.0};
        if (k == 1) joints.erase("elbow_r");
        text += json{{"t_ms", k * 33}, {"joints", joints}}.dump() + "\n";
    }
    const PoseStream pose = parse_pose_stream(text);
    CHECK(pose.stream.payload.size() == 3);
    CHECK(pose.joint_names.size() == 17);
    CHECK(pose.incomplete_frames == 1);
    CHECK_FALSE(std::get<PoseFrame>(pose.stream.payload[1]).complete);
    CHECK_THROWS_AS(parse_pose_stream("{\"t_ms\": 0, \"joints\": {}}\n{oops\n"), Error);
}

TEST_CASE("frame manifest timing and pnm codec") {
    TempDir dir;
    sscope::testing::write_frame_sequence(dir.path(), 30, 30.0);
    const FrameSequence seq = load_frame_sequence(dir.path());
    CHECK(seq.duration_ms() == 1000);
    for (std::size_t k = 1; k < seq.frames.size(); ++k) {
        const Millis gap = seq.frames[k].t_ms - seq.frames[k - 1].t_ms;
        CHECK(gap >= 32);
        CHECK(gap <= 34);
    }
    Image img{4, 2, 3, std::vector<unsigned char>(24)};
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<unsigned char>(i * 10);
    const auto decoded = decode_pnm(encode_pnm(img));
    REQUIRE(decoded);
    CHECK(decoded->pixels == img.pixels);
    const Image half = downscale(img, 2);
    CHECK(half.width == 2);
    CHECK(half.height == 1);
}

TEST_CASE("ingest: durations, idempotency, kind mismatch") {
    TempDir data;
    ProjectStore store(data.path());
    store.create_project("p");
    TempDir in;

    sscope::testing::write_wav(in / "zeros.wav", std::vector<double>(16000, 0.0), 16000);
    const Recording a = ingest_recording(store, "p", in / "zeros.wav", RecordingKind::audio_wav);
    CHECK(a.duration_ms == 1000);
    CHECK(a.metadata["sample_rate_hz"] == 16000);
    const Recording again = ingest_recording(store, "p", in / "zeros.wav", RecordingKind::audio_wav);
    CHECK(again.id == a.id);
    CHECK(again.content_digest == a.content_digest);
    CHECK(store.project("p").recordings.size() == 1);
    std::size_t blobs = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(data / "blobs")) ++blobs;
    CHECK(blobs == 1);

    sscope::testing::write_frame_sequence(in / "frames", 30, 30.0);
    const Recording f = ingest_recording(store, "p", in / "frames", RecordingKind::frame_sequence);
    CHECK(f.duration_ms == 1000);
    CHECK(f.metadata["fps"] == 30.0);

    sscope::testing::write_text(in / "talk.srt", "1\n00:00:00,100 --> 00:00:00,900\nhello there\n");
    const Recording t = ingest_recording(store, "p", in / "talk.srt", RecordingKind::transcript);
    CHECK(t.duration_ms == 900);
    const Project p = store.project("p");
    REQUIRE(p.streams.size() == 1);
    CHECK(p.streams[0].filter_id == "transcript");
    CHECK(store.load_stream(p.streams[0].id).payload.size() == 1);

    CHECK_THROWS_WITH_AS(ingest_recording(store, "p", in / "talk.srt", RecordingKind::audio_wav),
                         "kind/content mismatch", Error);
    CHECK_THROWS_WITH_AS(ingest_recording(store, "p", in / "zeros.wav", RecordingKind::transcript),
                         "kind/content mismatch", Error);
    CHECK_THROWS_WITH_AS(ingest_recording(store, "p", in / "frames", RecordingKind::audio_wav),
                         "kind/content mismatch", Error);
    sscope::testing::write_text(in / "broken.wav", std::string("RIFF\x10\0\0\0WAVEfmt ", 16));
    CHECK_THROWS_WITH_AS(ingest_recording(store, "p", in / "broken.wav", RecordingKind::audio_wav),
                         "unreadable media", Error);
}

}
