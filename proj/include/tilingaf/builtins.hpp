#pragma once

#include <string>
#include <vector>

#include "tilingaf/system.hpp"

namespace tilingaf {

// Built-in example systems, constructed in code:
//   "sq"    — square quartering: one unit-square prototile, lambda = 2,
//             subdivided into its four half-integer translates.
//   "chair" — the chair (L-tromino) substitution: four rotation prototiles,
//             lambda = 2, each chair subdivided into four chairs.
SubstSystem builtin_system(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace tilingaf
