#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

namespace switchreg {

using json = nlohmann::json;

/// Deterministic JSON serialization for goldens: keys sorted (json's own map
/// order), floating-point numbers at 17 significant digits, non-finite
/// numbers as null, 2-space indentation, trailing newline.
void write_json(const json& j, std::ostream& os);
void write_json_file(const json& j, const std::string& path);

}  // namespace switchreg
