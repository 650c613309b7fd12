#include <doctest.h>

#include "fixtures.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"
#include "sscope/core/stream_ops.hpp"
#include "sscope/ingest/ingest.hpp"
#include "sscope/report/annotations.hpp"
#include "sscope/report/export.hpp"
#include "sscope/report/svg.hpp"
#include "sscope/store/project_store.hpp"

using namespace sscope;
using sscope::testing::TempDir;

namespace {

struct Session {
    TempDir data, media;
    ProjectStore store{data.path()};
    std::string samples_id, events_id;

    Session() {
        store.create_project("p");
        sscope::testing::write_wav(media / "a.wav", std::vector<double>(160000, 0.0), 16000);
        ingest_recording(store, "p", media / "a.wav", RecordingKind::audio_wav);
        sscope::testing::write_text(media / "t.srt",
                                    "1\n00:00:00,500 --> 00:00:01,500\nfirst, \"quoted\" line\n\n"
                                    "2\n00:00:08,000 --> 00:00:09,000\n<second> & last\n");
        ingest_recording(store, "p", media / "t.srt", RecordingKind::transcript);

        std::vector<Record> samples;
        for (Millis t = 0; t <= 10000; t += 100) samples.push_back(Sample{t, static_cast<double>(t % 700), t % 300 != 0});
        samples_id = put("sig", StreamVariant::continuous, "Hz", samples);
        events_id = put("emo", StreamVariant::event, std::nullopt,
                        {EventSpan{0, 1000, "neutral", 0.75, {}}, EventSpan{500, 1500, "happy, \"very\"", 0.5, {}}});
    }

    std::string put(const std::string& name, StreamVariant v, std::optional<std::string> unit, std::vector<Record> recs) {
        StreamInfo info;
        info.id = derived_id("s-", {"p", name});
        info.project_id = "p";
        info.filter_id = "test";
        info.name = name;
        info.variant = v;
        info.unit = std::move(unit);
        info.path = "manual-" + name + ".jsonl";
        info.record_count = recs.size();
        write_stream_file(store.absolute(info.path), recs);
        store.put_stream(info);
        return info.id;
    }

    Annotation annotate(AnnotationKind kind, Millis t0, Millis t1, std::string text = "note") {
        return create_annotation(store, "p", AnnotationDraft{samples_id, kind, t0, t1, std::move(text), "ana"});
    }
};

}  // namespace

TEST_SUITE("report") {

TEST_CASE("annotation validation and ordering") {
    Session s;
    CHECK_THROWS_WITH_AS(create_annotation(s.store, "p", AnnotationDraft{"s-missing", AnnotationKind::point, 1, 1, "", ""}),
                         "unknown stream: s-missing", Error);
    CHECK_THROWS_WITH_AS(s.annotate(AnnotationKind::interval, 500, 100), "inverted interval", Error);
    CHECK_THROWS_WITH_AS(s.annotate(AnnotationKind::interval, 0, 10001), "out-of-range timestamp", Error);
    CHECK_THROWS_WITH_AS(s.annotate(AnnotationKind::point, 10, 20), "point annotation needs t0 == t1", Error);

    const Annotation b = s.annotate(AnnotationKind::point, 3000, 3000, "b");
    const Annotation a = s.annotate(AnnotationKind::interval, 1000, 2000, "a");
    const Annotation c = s.annotate(AnnotationKind::point, 3000, 3000, "c");
    const auto listed = list_annotations(s.store, "p");
    REQUIRE(listed.size() == 3);
    CHECK(listed[0].id == a.id);
    CHECK(listed[1].id == b.id);
    CHECK(listed[2].id == c.id);

    AnnotationPatch patch;
    patch.text = "edited";
    CHECK(update_annotation(s.store, a.id, patch).text == "edited");
    patch.t0_ms = 2500;
    CHECK_THROWS_AS(update_annotation(s.store, a.id, patch), Error);
    s.store.delete_annotation(c.id);
    CHECK(list_annotations(s.store, "p").size() == 2);

    CHECK(annotation_draft_from_json(json{{"stream_id", "x"}, {"kind", "interval"}, {"t0_ms", 1}, {"t1_ms", 2}}).kind ==
          AnnotationKind::interval);
    CHECK_THROWS_AS(annotation_draft_from_json(json{{"kind", "point"}}), Error);
}

TEST_CASE("annotlette: groups, timeline slice, transcript, placeholder") {
    Session s;
    const Annotation point = s.annotate(AnnotationKind::point, 1000, 1000, "look <here> & there");
    const std::string svg = annotlette_svg(s.store, point.id);
    CHECK(sscope::testing::svg_group_ids(svg) == std::vector<std::string>{"metadata", "transcript", "annotation", "timeline"});
    const std::size_t expected = slice_stream(s.store.load_stream(s.samples_id), 0, 3000).payload.size();
    CHECK(sscope::testing::svg_count_class(svg, "timeline", "rec") == expected);
    CHECK(sscope::testing::svg_group_contains_text(svg, "transcript", "first, \"quoted\" line"));
    CHECK(sscope::testing::svg_group_contains_text(svg, "annotation", "look <here> & there"));

    const Annotation silent = s.annotate(AnnotationKind::interval, 4000, 5000);
    const std::string quiet = annotlette_svg(s.store, silent.id, 1000);
    CHECK(sscope::testing::svg_count_class(quiet, "transcript", "placeholder") == 1);
    CHECK(sscope::testing::svg_count_class(quiet, "transcript", "segment") == 0);
    CHECK(sscope::testing::svg_count_class(quiet, "timeline", "rec") ==
          slice_stream(s.store.load_stream(s.samples_id), 3000, 6000).payload.size());

    const std::string wide = annotlette_svg(s.store, silent.id, 4000);
    CHECK(sscope::testing::svg_count_class(wide, "transcript", "segment") == 2);
    CHECK_THROWS_AS(annotlette_svg(s.store, silent.id, -1), Error);

    CHECK_NOTHROW(sscope::testing::svg_group_ids(annotations_overview_svg(s.store, "p")));
    CHECK(xml_escape("<a & \"b\">") == "&lt;a &amp; &quot;b&quot;&gt;");
}

TEST_CASE("export: jsonl round trip and csv quoting") {
    Session s;
    s.annotate(AnnotationKind::interval, 100, 200, "with, comma");
    const std::string jsonl = export_tabular(s.store, "p", ExportWhat::streams, ExportFormat::jsonl);
    const auto parsed = parse_stream_export(jsonl);
    std::size_t total = 0;
    for (const auto& info : s.store.project("p").streams) {
        const DataStream original = s.store.load_stream(info.id);
        std::vector<Record> back;
        for (const auto& r : parsed)
            if (r.stream_id == info.id) back.push_back(r.record);
        CHECK(back == original.payload);
        total += original.payload.size();
    }
    CHECK(parsed.size() == total);

    const auto notes = parse_annotation_export(export_tabular(s.store, "p", ExportWhat::annotations, ExportFormat::jsonl));
    CHECK(notes == list_annotations(s.store, "p"));

    const std::string csv = export_tabular(s.store, "p", ExportWhat::streams, ExportFormat::csv);
    CHECK(csv.rfind("stream_id,variant,t0_ms,t1_ms,label_value,probability_unit\n", 0) == 0);
    CHECK(csv.find("\"happy, \"\"very\"\"\"") != std::string::npos);
    const std::string acsv = export_tabular(s.store, "p", ExportWhat::annotations, ExportFormat::csv);
    CHECK(acsv.rfind("id,stream_id,kind,t0_ms,t1_ms,text,author,created_at\n", 0) == 0);
    CHECK(acsv.find("\"with, comma\"") != std::string::npos);

    const auto transcript = parse_stream_export(export_tabular(s.store, "p", ExportWhat::transcript, ExportFormat::jsonl));
    CHECK(transcript.size() == 2);
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a\nb") == "\"a\nb\"");
    CHECK_THROWS_AS(export_what_from_string("everything"), Error);
    CHECK_THROWS_AS(parse_stream_export("{not json\n"), Error);
}

}
