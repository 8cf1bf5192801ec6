#pragma once

#include <json.hpp>
#include <string>

#include "varexp/exponent.hpp"
#include "varexp/grid.hpp"
#include "varexp/rigidity.hpp"
#include "varexp/varnorm.hpp"

namespace varexp {

using json = nlohmann::json;

// Flat field records: {shape, spacing, rank, values[]}.
json field_to_json(const TensorField& f);
TensorField field_from_json(const DomainPtr& dom, const json& j);

// Exponent records: {shape, spacing, values[]}.
json exponent_to_json(const ExponentField& p);
ExponentField exponent_from_json(const DomainPtr& dom, const json& j);

// Whitney families: [{center, halfwidth, level}, ...].
json whitney_to_json(const std::vector<WhitneyCube>& cubes);
std::vector<WhitneyCube> whitney_from_json(const json& j, int dim);

json norm_result_to_json(const NormResult& r);
json report_to_json(const RigidityReport& r);

// Deterministic float formatting for CSV cells (shortest round-trip "%.17g").
std::string csv_num(double v);

}  // namespace varexp
