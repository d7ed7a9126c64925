#pragma once

#include <string>

#include "tilingaf/system.hpp"

namespace tilingaf {

// System file format (JSON):
//   {
//     "field": "rational" | {"sqrt": d},
//     "lambda": "<FieldElem>",
//     "prototiles": [{"id": ..., "label": ..., "vertices": [[x, y], ...]}, ...],
//     "rule": {"<id>": [{"proto": ..., "pos": [x, y]}, ...], ...},
//     "asserted": {"aperiodic": bool, "fpc": bool}
//   }
// Coordinates are FieldElem strings (integers also accepted on input).
// Malformed input raises ParseError with line/column information.

SubstSystem load_system_string(const std::string& text);
SubstSystem load_system_file(const std::string& path);

// Canonical serialization: fixed key order, rule keys in prototile order,
// 2-space indentation, trailing newline.  Loading then saving a canonically
// saved file is byte-identical.
std::string save_system_string(const SubstSystem& s);
void save_system_file(const SubstSystem& s, const std::string& path);

}  // namespace tilingaf
