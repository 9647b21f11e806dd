#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "fibenv/box_cover.hpp"
#include "fibenv/density.hpp"
#include "fibenv/functions.hpp"
#include "fibenv/obstruction.hpp"
#include "fibenv/regular_vector.hpp"
#include "fibenv/space.hpp"

namespace fibenv {

using Json = nlohmann::json;

// Combined space document:
// {"points": [...], "infinity": "id"|null, "map": {"x":"y",...}, "weights": {...}}
Json system_to_json(const FiberedSystem& sys);
FiberedSystem system_from_json(const Json& doc);

// {"space": <system doc or null>, "values": {"x": [re, im], ...}}
Json function_to_json(const SampledFunction& f, const Json& space_ref = nullptr);
SampledFunction function_from_json(const Json& doc, const FiniteSpace& space);

// {"algebra_generators": [...], "module_generators": [...],
//  "degree_A": n, "degree_M": n} with generators as value maps.
Json module_to_json(const PullbackModule& module);
PullbackModule module_from_json(const Json& doc, const FiberedSystem& sys);

Json certificate_to_json(const EnvelopeCertificate& cert);

Json cover_to_json(const CoverResult& cover);
std::string cover_to_csv(const CoverResult& cover);

Json trace_to_json(const ContradictionTrace& trace);

// {"S": [[...]], "T": [[...]]}
Json avoidance_to_json(const AvoidanceInstance& inst);
AvoidanceInstance avoidance_from_json(const Json& doc);

// {"kind": "perturbation", "nu": {...weights...}, "rate": "1/n"} or
// {"kind": "explicit", "terms": [{...weights...}, ...]}
MeasureSequence sequence_from_json(const Json& doc, const WeightedMeasure& base);

// RFC 4180: fields quoted when needed, rows ending in CRLF.
std::string csv_row(const std::vector<std::string>& fields);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fibenv
