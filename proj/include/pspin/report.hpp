#pragma once

#include <string>

#include "json.hpp"

namespace pspin {

using ordered_json = nlohmann::ordered_json;

// Serializes with doubles rendered at 17 significant digits (%.17g), so reports
// round-trip exactly and are byte-stable across runs. Non-finite floats become null.
std::string dump_json17(const ordered_json& j, int indent = 2);

// writes to path, or stdout when path is empty
void write_text(const std::string& path, const std::string& body);

}  // namespace pspin
