#pragma once

#include <string>

#include "zbias/conditions.hpp"
#include "zbias/estimators.hpp"
#include "zbias/montecarlo.hpp"

namespace zbias {

/// JSON renderings. Numbers use 17 significant digits; NaN and infinities
/// become null.
std::string format_json_number(double x);

std::string to_json(const EstimateSet& e);
std::string to_json(const DceSet& e);
std::string to_json(const RrSet& e);
std::string to_json(const ConditionReport& r);
std::string to_json(const ConditionBundle& bundle);
std::string to_json(const McResult& r);

}  // namespace zbias
