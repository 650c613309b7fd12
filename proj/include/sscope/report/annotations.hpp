#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sscope/store/project_store.hpp"

namespace sscope {

struct AnnotationDraft {
    std::string stream_id;
    AnnotationKind kind = AnnotationKind::point;
    Millis t0_ms = 0;
    Millis t1_ms = 0;
    std::string text;
    std::string author;
};

struct AnnotationPatch {
    std::optional<std::string> stream_id;
    std::optional<AnnotationKind> kind;
    std::optional<Millis> t0_ms;
    std::optional<Millis> t1_ms;
    std::optional<std::string> text;
    std::optional<std::string> author;
};

AnnotationDraft annotation_draft_from_json(const json& j);
AnnotationPatch annotation_patch_from_json(const json& j);

// Errors: "unknown stream", "inverted interval", "out-of-range timestamp",
// "point annotation needs t0 == t1".
Annotation create_annotation(ProjectStore& store, std::string_view project_id, const AnnotationDraft& draft);
Annotation update_annotation(ProjectStore& store, std::string_view annotation_id, const AnnotationPatch& patch);

// Ordered by t0, then creation time, then creation order.
std::vector<Annotation> list_annotations(const ProjectStore& store, std::string_view project_id);

}  // namespace sscope
