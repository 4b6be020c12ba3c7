#pragma once

#include <iosfwd>
#include <string>

#include "rgbp/factor_graph.hpp"

namespace rgbp {

/// UAI-style plain text model: "MARKOV", variable count, cardinalities,
/// factor count, one size-prefixed scope line per factor, then one table
/// block per factor (entry count followed by linear-domain reals).
/// Whitespace is not significant on input; values are written with 17
/// significant digits. Unsorted scopes are canonicalized on load.
void write_uai(const FactorGraph& fg, std::ostream& os);
void write_uai_file(const FactorGraph& fg, const std::string& path);

FactorGraph read_uai(std::istream& is);
FactorGraph read_uai_file(const std::string& path);

}  // namespace rgbp
