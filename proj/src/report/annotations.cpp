#include "sscope/report/annotations.hpp"

#include <algorithm>

#include "sscope/core/error.hpp"

namespace sscope {

namespace {

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<T>();
}

void validate(const Project& project, const Annotation& a) {
    if (!project.stream(a.stream_id)) throw Error(Errc::not_found, "unknown stream: " + a.stream_id);
    if (a.t0_ms > a.t1_ms)
        throw Error(Errc::invalid_argument, "inverted interval",
                    "t0_ms " + std::to_string(a.t0_ms) + " > t1_ms " + std::to_string(a.t1_ms));
    const Millis duration = project.session_duration();
    if (a.t0_ms < 0 || a.t1_ms > duration)
        throw Error(Errc::invalid_argument, "out-of-range timestamp",
                    "[" + std::to_string(a.t0_ms) + ", " + std::to_string(a.t1_ms) + "] outside [0, " +
                        std::to_string(duration) + "]");
    if (a.kind == AnnotationKind::point && a.t0_ms != a.t1_ms)
        throw Error(Errc::invalid_argument, "point annotation needs t0 == t1");
}

}  // namespace

AnnotationDraft annotation_draft_from_json(const json& j) {
    try {
        AnnotationDraft d;
        d.stream_id = j.at("stream_id").get<std::string>();
        d.t0_ms = j.at("t0_ms").get<Millis>();
        d.t1_ms = j.value("t1_ms", d.t0_ms);
        d.kind = j.contains("kind") ? annotation_kind_from_string(j["kind"].get<std::string>())
                                    : (d.t0_ms == d.t1_ms ? AnnotationKind::point : AnnotationKind::interval);
        d.text = j.value("text", std::string{});
        d.author = j.value("author", std::string{});
        return d;
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_argument, "malformed annotation", e.what());
    }
}

AnnotationPatch annotation_patch_from_json(const json& j) {
    try {
        AnnotationPatch p;
        p.stream_id = optional_field<std::string>(j, "stream_id");
        if (auto k = optional_field<std::string>(j, "kind")) p.kind = annotation_kind_from_string(*k);
        p.t0_ms = optional_field<Millis>(j, "t0_ms");
        p.t1_ms = optional_field<Millis>(j, "t1_ms");
        p.text = optional_field<std::string>(j, "text");
        p.author = optional_field<std::string>(j, "author");
        return p;
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_argument, "malformed annotation", e.what());
    }
}

Annotation create_annotation(ProjectStore& store, std::string_view project_id, const AnnotationDraft& draft) {
    const Project project = store.project(project_id);
    Annotation a;
    a.project_id = project.id;
    a.stream_id = draft.stream_id;
    a.kind = draft.kind;
    a.t0_ms = draft.t0_ms;
    a.t1_ms = draft.t1_ms;
    a.text = draft.text;
    a.author = draft.author;
    validate(project, a);
    return store.add_annotation(a);
}

Annotation update_annotation(ProjectStore& store, std::string_view annotation_id, const AnnotationPatch& patch) {
    Annotation a = store.annotation(annotation_id);
    if (patch.stream_id) a.stream_id = *patch.stream_id;
    if (patch.kind) a.kind = *patch.kind;
    if (patch.t0_ms) a.t0_ms = *patch.t0_ms;
    if (patch.t1_ms) a.t1_ms = *patch.t1_ms;
    if (patch.text) a.text = *patch.text;
    if (patch.author) a.author = *patch.author;
    validate(store.project(a.project_id), a);
    return store.replace_annotation(a);
}

std::vector<Annotation> list_annotations(const ProjectStore& store, std::string_view project_id) {
    std::vector<Annotation> out = store.project(project_id).annotations;
    std::stable_sort(out.begin(), out.end(), [](const Annotation& a, const Annotation& b) {
        return std::tie(a.t0_ms, a.created_at, a.sequence) < std::tie(b.t0_ms, b.created_at, b.sequence);
    });
    return out;
}

}  // namespace sscope
