#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_ops.hpp"
#include "sscope/filters/energy.hpp"
#include "sscope/filters/joint_angles.hpp"
#include "sscope/filters/pitch.hpp"
#include "sscope/filters/speech_rate.hpp"
#include "sscope/filters/thumbnails.hpp"
#include "sscope/ingest/frames.hpp"

using namespace sscope;
using sscope::testing::TempDir;

namespace {

AudioBuffer audio_of(std::vector<double> samples, int rate) {
    AudioBuffer a;
    a.sample_rate_hz = rate;
    a.samples = std::move(samples);
    return a;
}

std::vector<double> voiced_values(const DataStream& s) {
    std::vector<double> out;
    for (const auto& r : s.payload)
        if (const auto& smp = std::get<Sample>(r); smp.voiced.value_or(true)) out.push_back(smp.value);
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_SUITE("filters") {

TEST_CASE("pitch: 440 Hz sine, silence, empty audio, bad params") {
    const DataStream s = pitch_track(audio_of(sscope::testing::sine(440, 16000, 2.0), 16000));
    const auto v = voiced_values(s);
    REQUIRE(v.size() > 150);
    CHECK(std::fabs(median(v) - 440.0) <= 4.4);
    for (double f : v) {
        CHECK(f >= 75.0);
        CHECK(f <= 600.0);
    }
    CHECK(s.unit == std::optional<std::string>("Hz"));
    CHECK_FALSE(check_stream(s, 2000).has_value());

    CHECK(voiced_values(pitch_track(audio_of(std::vector<double>(16000, 0.0), 16000))).empty());
    CHECK(pitch_track(audio_of({}, 16000)).payload.empty());
    PitchParams bad;
    bad.fmin_hz = 500;
    bad.fmax_hz = 400;
    CHECK_THROWS_AS(pitch_track(audio_of(std::vector<double>(100, 0.0), 16000), bad), Error);
}

TEST_CASE("pitch: timestamps at frame centers") {
    const DataStream s = pitch_track(audio_of(sscope::testing::sine(220, 16000, 0.5), 16000));
    REQUIRE(s.payload.size() >= 2);
    CHECK(record_start(s.payload[0]) == 20);
    CHECK(record_start(s.payload[1]) == 30);
}

TEST_CASE("speech rate examples") {
    std::vector<TextSegment> segs;
    for (int i = 0; i < 20; ++i) segs.push_back(TextSegment{i * 500, i * 500 + 400, "word", 1});
    const DataStream s = speech_rate(segs, 10000, 5000, 5000);
    REQUIRE(s.payload.size() == 2);
    CHECK(std::get<Sample>(s.payload[0]).value == 2.0);
    CHECK(std::get<Sample>(s.payload[1]).value == 2.0);

    const DataStream empty = speech_rate({}, 7000, 5000, 1000);
    CHECK(empty.payload.size() == 7);
    for (const auto& r : empty.payload) CHECK(std::get<Sample>(r).value == 0.0);
    CHECK_THROWS_AS(speech_rate({}, 1000, 0, 1000), Error);
}

TEST_CASE("speech rate equals brute-force midpoint counting on random transcripts") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Millis duration = 1000 + static_cast<Millis>(rng() % 60000);
        const auto segs = sscope::testing::random_segments(rng, 50, duration);
        const Millis window = 200 + static_cast<Millis>(rng() % 8000);
        const Millis hop = 100 + static_cast<Millis>(rng() % 4000);
        const DataStream s = speech_rate(segs, duration, window, hop);
        const auto oracle = sscope::testing::brute_speech_rate(segs, duration, window, hop);
        REQUIRE(s.payload.size() == oracle.size());
        for (std::size_t k = 0; k < oracle.size(); ++k) CHECK(std::get<Sample>(s.payload[k]).value == oracle[k]);
    }
}

TEST_CASE("joint angle fixtures and degenerate limbs") {
    CHECK(*angle_degrees({0, 0, 0}, {1, 0, 0}, {1, 1, 0}) == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(*angle_degrees({0, 0, 0}, {1, 0, 0}, {2, 0, 0}) == doctest::Approx(180.0).epsilon(1e-12));
    CHECK(*angle_degrees({0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}) == doctest::Approx(60.0).epsilon(1e-12));
    CHECK_FALSE(angle_degrees({1, 0, 0}, {1, 0, 0}, {2, 0, 0}).has_value());

    DataStream pose;
    pose.payload.push_back(PoseFrame{0, sscope::testing::skeleton_with_elbow(45), true});
    auto degenerate = sscope::testing::skeleton_with_elbow(90);
    degenerate["wrist_r"] = degenerate["elbow_r"];
    pose.payload.push_back(PoseFrame{33, degenerate, true});
    auto missing = sscope::testing::skeleton_with_elbow(90);
    missing.erase("elbow_r");
    pose.payload.push_back(PoseFrame{66, missing, false});
    const JointAngleResult r = joint_angles(pose, {{"shoulder_r", "elbow_r", "wrist_r"}});
    REQUIRE(r.streams.size() == 1);
    CHECK(r.streams[0].name == "angle:elbow_r");
    CHECK(r.streams[0].unit == std::optional<std::string>("deg"));
    REQUIRE(r.streams[0].payload.size() == 1);
    CHECK(std::get<Sample>(r.streams[0].payload[0]).value == doctest::Approx(45.0).epsilon(1e-12));
    CHECK(r.degenerate_samples == 1);
    CHECK(r.incomplete_frames == 1);
}

TEST_CASE("circular arm motion gives a sinusoidal elbow angle") {
    DataStream pose;
    for (int k = 0; k < 90; ++k) {
        const double truth = 90.0 + 45.0 * std::sin(2 * M_PI * k / 30.0);
        pose.payload.push_back(PoseFrame{k * 33, sscope::testing::skeleton_with_elbow(truth), true});
    }
    const JointAngleResult r = joint_angles(pose, {{"shoulder_r", "elbow_r", "wrist_r"}});
    for (int k = 0; k < 90; ++k)
        CHECK(std::get<Sample>(r.streams[0].payload[static_cast<std::size_t>(k)]).value ==
              doctest::Approx(90.0 + 45.0 * std::sin(2 * M_PI * k / 30.0)).epsilon(1e-9));
}

TEST_CASE("divergence hand-computed and brute-force cases") {
    const std::vector<double> z{0, 0}, o{1, 1};
    const Divergence d0 = sample_divergence(z, z);
    CHECK(d0.e_hat == 0.0);
    CHECK(d0.q_hat == 0.0);
    const Divergence d1 = sample_divergence(z, o, 1.0);
    CHECK(d1.e_hat == doctest::Approx(2.0));
    CHECK(d1.q_hat == doctest::Approx(2.0));
    CHECK_THROWS_AS(sample_divergence(std::vector<double>{1}, o), Error);
    CHECK_THROWS_AS(sample_divergence(z, o, 2.5), Error);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int t = 0; t < 30; ++t) {
        std::vector<double> x(2 + rng() % 30), y(2 + rng() % 30);
        for (auto& v : x) v = g(rng);
        for (auto& v : y) v = g(rng) + 1.0;
        const double oracle = sscope::testing::brute_divergence_e(x, y, 1.0);
        CHECK(std::fabs(sample_divergence(x, y, 1.0).e_hat - oracle) <= 1e-9);
    }
}

TEST_CASE("best split agrees with exhaustive search") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int t = 0; t < 10; ++t) {
        std::vector<double> x(40 + rng() % 40);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = g(rng) + (i > x.size() / 3 ? 2.0 : 0.0);
        const std::size_t min_size = 5;
        const auto best = best_split(x, 1.0, min_size);
        REQUIRE(best);
        double top = -INFINITY;
        std::size_t arg = 0;
        for (std::size_t tau = min_size; tau + min_size <= x.size(); ++tau) {
            const std::vector<double> l(x.begin(), x.begin() + static_cast<long>(tau)), r(x.begin() + static_cast<long>(tau), x.end());
            const double q = sample_divergence(l, r, 1.0).q_hat;
            if (q > top + 1e-9) {
                top = q;
                arg = tau;
            }
        }
        CHECK(best->index == arg);
        CHECK(best->q_hat == doctest::Approx(top).epsilon(1e-9));
    }
    CHECK_FALSE(best_split(std::vector<double>(9, 1.0), 1.0, 5).has_value());
}

TEST_CASE("e-divisive: step, constant, short series, determinism, partition") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> step(100);
    for (std::size_t i = 0; i < 100; ++i) step[i] = (i < 50 ? 0.0 : 5.0) + noise(rng);
    const SegmentationResult r = e_divisive(step);
    REQUIRE(r.change_points.size() == 1);
    CHECK(r.change_points[0] >= 48);
    CHECK(r.change_points[0] <= 52);

    CHECK(e_divisive(std::vector<double>(200, 3.0)).change_points.empty());
    const SegmentationResult shortr = e_divisive(std::vector<double>(50, 1.0));
    CHECK(shortr.segments.size() == 1);
    CHECK(shortr.segments[0] == std::pair<std::size_t, std::size_t>{0, 50});

    SegmentationParams p;
    p.seed = 99;
    const auto a = e_divisive(step, p);
    const auto b = e_divisive(step, p);
    CHECK(a.change_points == b.change_points);
    REQUIRE(a.splits.size() == b.splits.size());
    for (std::size_t i = 0; i < a.splits.size(); ++i) CHECK(a.splits[i].p_value == b.splits[i].p_value);

    std::size_t covered = 0;
    for (const auto& [s, e] : a.segments) {
        CHECK(s == covered);
        CHECK(e - s >= p.min_size);
        covered = e;
    }
    CHECK(covered == step.size());
    for (std::size_t i = 1; i < a.change_points.size(); ++i) CHECK(a.change_points[i - 1] < a.change_points[i]);
}

TEST_CASE("e-divisive: prepending a constant block shifts change points") {
    std::vector<double> step(100);
    for (std::size_t i = 0; i < 100; ++i) step[i] = i < 50 ? 0.0 : 5.0;
    SegmentationParams p;
    const auto base = e_divisive(step, p);
    std::vector<double> shifted(p.min_size, step.front());
    shifted.insert(shifted.end(), step.begin(), step.end());
    const auto moved = e_divisive(shifted, p);
    REQUIRE(base.change_points.size() == 1);
    REQUIRE(moved.change_points.size() == 1);
    CHECK(moved.change_points[0] == base.change_points[0] + p.min_size);
}

TEST_CASE("counter rng is reproducible per stream") {
    CounterRng a(5, 1), b(5, 1), c(5, 2);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        differs |= x != c.next();
    }
    CHECK(differs);
    CounterRng r(1, 1);
    for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
}

TEST_CASE("thumbnail midpoints, count one, count equal to frames") {
    TempDir dir, out;
    sscope::testing::write_frame_sequence(dir.path(), 300, 30.0);
    const FrameSequence seq = load_frame_sequence(dir.path());
    const DataStream five = thumbnail_track(seq, 5, 4, out.path());
    std::vector<Millis> ts;
    for (const auto& r : five.payload) ts.push_back(record_start(r));
    CHECK(ts == std::vector<Millis>{1000, 3000, 5000, 7000, 9000});
    for (const auto& r : five.payload) CHECK(std::filesystem::exists(out.path() / std::get<ThumbRef>(r).ref));
    const auto one = thumbnail_track(seq, 1, 2, out.path());
    REQUIRE(one.payload.size() == 1);
    CHECK(record_start(one.payload[0]) == 5000);

    TempDir small;
    sscope::testing::write_frame_sequence(small.path(), 6, 30.0);
    const FrameSequence six = load_frame_sequence(small.path());
    const auto all = thumbnail_frame_indices(six, 6);
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    CHECK(thumbnail_frame_indices(six, 50).size() == 6);
}

}
