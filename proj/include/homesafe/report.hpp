#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "homesafe/check.hpp"

namespace homesafe {

// Run metadata recorded with every report.
struct RunInfo {
    std::vector<std::pair<std::string, std::string>> inputs; // path -> content digest
    std::vector<std::pair<std::string, std::string>> flags;
    std::uint64_t seed = 0;
};

// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string digest(std::string_view bytes);
std::string to_hex(std::string_view bytes);
std::string from_hex(std::string_view hex);

// Human-readable report with the per-step trace of every violation.
std::string render_text(const CheckResult& result, const RunInfo& info);

// One JSON object per line: a "run" record, one "group" record per
// exploration, one "violation" record per violation followed by its "step"
// records, and a closing "summary". Contains no timing, so identical inputs
// give identical bytes.
std::string render_records(const CheckResult& result, const RunInfo& info, const SystemConfig& config);

// A violation read back from records, with events in symbolic form.
struct RecordedViolation {
    std::string property;
    std::vector<std::string> apps;
    std::vector<std::string> group;
    std::string events_json; // array of event objects
    std::vector<TraceStep> steps;
    std::string witness; // canonical state bytes
};

std::vector<RecordedViolation> parse_records(std::string_view text, const std::string& origin);

// Rebuilds the trace for a model of the recorded group. Throws
// DivergenceError when an event names something the model does not have.
Trace resolve_trace(const SystemModel& model, const RecordedViolation& rec);

} // namespace homesafe
