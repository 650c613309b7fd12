#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/engine/engine.hpp"
#include "sscope/filters/energy.hpp"
#include "sscope/filters/joint_angles.hpp"
#include "sscope/filters/pitch.hpp"
#include "sscope/filters/speech_rate.hpp"
#include "sscope/filters/thumbnails.hpp"
#include "sscope/ingest/frames.hpp"
#include "sscope/ingest/pose.hpp"
#include "sscope/ingest/transcript.hpp"
#include "sscope/ingest/wav.hpp"

namespace sscope {

namespace {

FilterOutput to_output(DataStream stream, json info = json::object()) {
    return FilterOutput{std::move(stream.name), stream.variant, std::move(stream.unit), std::move(stream.payload),
                        std::move(info)};
}

// Parameter type errors from json::value surface as argument errors.
FilterFn guarded(FilterFn fn) {
    return [fn = std::move(fn)](FilterContext& ctx) {
        try {
            return fn(ctx);
        } catch (const json::exception& e) {
            throw Error(Errc::invalid_argument, "invalid filter parameters", e.what());
        }
    };
}

FilterDescriptor builtin(std::string id, std::string display, std::string model, std::vector<RecordingKind> kinds,
                         json params, std::vector<OutputSpec> outputs) {
    FilterDescriptor d;
    d.filter_id = std::move(id);
    d.display_name = std::move(display);
    d.model_id = std::move(model);
    d.model_version = "1";
    d.input_kinds = std::move(kinds);
    d.params = std::move(params);
    d.outputs = std::move(outputs);
    d.execution = ExecutionKind::builtin;
    return d;
}

std::vector<FilterOutput> run_pitch(FilterContext& ctx) {
    const AudioBuffer audio = decode_wav(read_file(ctx.recording_path(RecordingKind::audio_wav)));
    if (ctx.progress) ctx.progress(0.5);
    std::vector<FilterOutput> out;
    out.push_back(to_output(pitch_track(audio, PitchParams::from_json(ctx.params))));
    return out;
}

std::vector<FilterOutput> run_speech_rate(FilterContext& ctx) {
    const auto path = ctx.recording_path(RecordingKind::transcript);
    const auto segments = parse_transcript(read_file(path), transcript_format_for_path(path.string()));
    const Millis window = ctx.params.value("window_ms", Millis{5000});
    const Millis hop = ctx.params.value("hop_ms", Millis{1000});
    std::vector<FilterOutput> out;
    out.push_back(to_output(speech_rate(segments, ctx.duration_ms, window, hop)));
    return out;
}

std::vector<FilterOutput> run_skeleton(FilterContext& ctx) {
    const FrameSequence frames = load_frame_sequence(ctx.recording_path(RecordingKind::frame_sequence));
    if (!frames.pose_file)
        throw Error(Errc::failed_precondition, "frame sequence has no pose file",
                    "add \"pose\": \"<file>.jsonl\" to the frame manifest");
    PoseStream pose = load_pose_stream(frames.dir / *frames.pose_file);
    pose.stream.name = "skeleton";
    json info{{"joints", pose.joint_names}, {"incomplete_frames", pose.incomplete_frames}};
    std::vector<FilterOutput> out;
    out.push_back(to_output(std::move(pose.stream), std::move(info)));
    return out;
}

std::vector<FilterOutput> run_joint_angles(FilterContext& ctx) {
    DataStream pose;
    pose.name = "skeleton";
    pose.payload = ctx.dependency_stream("skeleton", "skeleton");
    const auto triples = joint_triples_from_json(ctx.params.value("triples", to_json(default_joint_triples())));
    JointAngleResult result = joint_angles(pose, triples);
    const json info{{"incomplete_frames", result.incomplete_frames},
                    {"degenerate_samples", result.degenerate_samples}};
    std::vector<FilterOutput> out;
    for (auto& s : result.streams) out.push_back(to_output(std::move(s), info));
    return out;
}

std::vector<FilterOutput> run_e_divisive(FilterContext& ctx) {
    const std::string series_name = ctx.params.value("series", std::string{"angle:elbow_r"});
    DataStream series;
    series.name = series_name;
    series.payload = ctx.dependency_stream("joint_angles", series_name);
    SegmentationResult result;
    DataStream segments = e_divisive_segments(series, SegmentationParams::from_json(ctx.params), &result);
    segments.name = "segments";
    json info{{"series", series_name}, {"change_points", result.change_points}};
    std::vector<FilterOutput> out;
    out.push_back(to_output(std::move(segments), std::move(info)));
    return out;
}

std::vector<FilterOutput> run_thumbnails(FilterContext& ctx) {
    const FrameSequence frames = load_frame_sequence(ctx.recording_path(RecordingKind::frame_sequence));
    const auto count = ctx.params.value("count", std::size_t{20});
    const int scale = ctx.params.value("scale", 4);
    DataStream thumbs = thumbnail_track(frames, count, scale, ctx.staging_dir);
    thumbs.name = "thumbnails";
    std::vector<FilterOutput> out;
    out.push_back(to_output(std::move(thumbs), json{{"refs_relative_to", "cache_entry"}}));
    return out;
}

}  // namespace

void register_builtin_filters(Engine& engine) {
    const auto audio = RecordingKind::audio_wav;
    const auto frames = RecordingKind::frame_sequence;
    const auto transcript = RecordingKind::transcript;
    const auto continuous = StreamVariant::continuous;

    const PitchParams pitch;
    engine.register_filter(builtin("pitch", "Pitch", "acf-pitch", {audio},
                                   {{"frame_ms", pitch.frame_ms},
                                    {"hop_ms", pitch.hop_ms},
                                    {"fmin_hz", pitch.fmin_hz},
                                    {"fmax_hz", pitch.fmax_hz},
                                    {"voicing_threshold", pitch.voicing_threshold}},
                                   {{"pitch", continuous, "Hz"}}),
                           guarded(run_pitch));

    engine.register_filter(builtin("speech_rate", "Speech rate", "midpoint-rate", {transcript},
                                   {{"window_ms", 5000}, {"hop_ms", 1000}}, {{"speech_rate", continuous, "words/s"}}),
                           guarded(run_speech_rate));

    engine.register_filter(builtin("skeleton", "3D skeleton", "pose3d-file", {frames}, json::object(),
                                   {{"skeleton", continuous, std::nullopt}}),
                           guarded(run_skeleton));

    {
        auto d = builtin("joint_angles", "Joint angles", "pose3d-file", {frames},
                         {{"triples", to_json(default_joint_triples())}}, {});
        d.depends_on = {"skeleton"};
        for (const auto& t : default_joint_triples()) d.outputs.push_back({"angle:" + t.name(), continuous, "deg"});
        engine.register_filter(std::move(d), guarded(run_joint_angles));
    }

    {
        const SegmentationParams seg;
        auto d = builtin("e_divisive", "E-divisive segments", "e-divisive", {frames},
                         {{"series", "angle:elbow_r"},
                          {"alpha", seg.alpha},
                          {"min_size", seg.min_size},
                          {"n_permutations", seg.n_permutations},
                          {"p_threshold", seg.p_threshold},
                          {"seed", seg.seed}},
                         {{"segments", StreamVariant::event, std::nullopt}});
        d.depends_on = {"joint_angles"};
        engine.register_filter(std::move(d), guarded(run_e_divisive));
    }

    engine.register_filter(builtin("thumbnails", "Thumbnails", "thumbnailer", {frames}, {{"count", 20}, {"scale", 4}},
                                   {{"thumbnails", StreamVariant::thumbnail, std::nullopt}}),
                           guarded(run_thumbnails));
}

}  // namespace sscope
