#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sscope/store/project_store.hpp"

namespace sscope {

enum class ExportWhat { streams, annotations, transcript };
enum class ExportFormat { csv, jsonl };

ExportWhat export_what_from_string(std::string_view text);
ExportFormat export_format_from_string(std::string_view text);

// streams / transcript, csv: header
//   stream_id,variant,t0_ms,t1_ms,label_value,probability_unit
// and one row per record. jsonl: one {"stream_id","variant","unit","record"}
// object per record. annotations: one row / object per annotation.
std::string export_tabular(const ProjectStore& store, std::string_view project_id, ExportWhat what,
                           ExportFormat format);

struct ExportedRecord {
    std::string stream_id;
    StreamVariant variant = StreamVariant::continuous;
    std::optional<std::string> unit;
    Record record;

    bool operator==(const ExportedRecord&) const = default;
};

// Parses a streams / transcript jsonl export back into records.
std::vector<ExportedRecord> parse_stream_export(std::string_view jsonl);
std::vector<Annotation> parse_annotation_export(std::string_view jsonl);

std::string csv_field(std::string_view text);

}  // namespace sscope
