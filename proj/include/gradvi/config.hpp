#pragma once

// JSON problem configuration: parsing, validation, canonical echo and hashing.

#include "gradvi/problem.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>

namespace gradvi {

/// Parses and validates a config. Unknown keys are rejected; every error message
/// names the offending field path (e.g. "body.radius") or, for malformed JSON,
/// the line number.
ProblemSpec parse_config(const std::string& text);
ProblemSpec load_config(const std::string& path);

/// Canonical echo with all defaults filled in; parse_config(to_json(s).dump())
/// reproduces s.
nlohmann::json to_json(const ProblemSpec& spec);
nlohmann::json body_to_json(const ConvexBody& body);
ConvexBody body_from_json(const nlohmann::json& j, const std::string& where, std::size_t dim);

/// FNV-1a 64 of the canonical echo, as 16 hex digits.
std::string spec_hash(const ProblemSpec& spec);

/// Accepts a number or a string "p/q".
double parse_spacing(const nlohmann::json& j, const std::string& where);

}  // namespace gradvi
