#pragma once

#include <iosfwd>
#include <string>

#include "point_set.hpp"

namespace geoalign {

// Text format for weighted point sets. UTF-8, '#' starts a comment line,
// blank lines are ignored. The first data line is "d n"; each of the n
// following data lines is "weight x_1 ... x_d". The writer emits 17
// significant digits so values round-trip exactly.
//
// Parse failures throw ParseError with 1-based line and column.
WeightedPointSet read_point_set(std::istream& in, const std::string& name);
WeightedPointSet load_point_set(const std::string& path);

void write_point_set(std::ostream& out, const WeightedPointSet& p);
void save_point_set(const WeightedPointSet& p, const std::string& path);

}  // namespace geoalign
