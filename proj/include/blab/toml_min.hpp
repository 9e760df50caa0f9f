#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace blab {

/// Minimal strict TOML subset parser used for scenario files: comments,
/// [dotted.table] headers, bare/dotted keys, strings, integers, floats,
/// booleans, flat arrays of scalars. Duplicate keys are errors. Anything
/// outside the subset is a parse error naming the offending line.
nlohmann::ordered_json parse_toml_subset(const std::string& text);

}  // namespace blab
