#pragma once

#include <string>
#include <string_view>

#include "sscope/store/project_store.hpp"

namespace sscope {

inline constexpr Millis kDefaultContextPad = 2000;
inline constexpr const char* kNoDialoguePlaceholder = "No speech was transcribed in this span.";

std::string xml_escape(std::string_view text);

// Standalone SVG with four groups: #metadata (author, times, stream),
// #transcript (segments overlapping the padded span, or the placeholder),
// #annotation (the text) and #timeline (the annotated stream sliced to
// [t0 - pad, t1 + pad], one element of class "rec" per record).
std::string annotlette_svg(const ProjectStore& store, std::string_view annotation_id,
                           Millis context_pad_ms = kDefaultContextPad);

// Whole-session view: one lane per annotated stream, each annotation drawn
// as a step over [t0, t1] in the lane's color.
std::string annotations_overview_svg(const ProjectStore& store, std::string_view project_id);

}  // namespace sscope
