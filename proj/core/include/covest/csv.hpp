#pragma once

// Tick data CSV: long format with header `asset,time,value`, one
// observation per row. Assets keep first-appearance order; rows keep file
// order within an asset. Grid validation (monotonicity, [0,1] range)
// happens later in build_panel, not here.

#include <iosfwd>
#include <string>
#include <vector>

#include "covest/grids.hpp"

namespace covest {

// normalize_time rescales the pooled time range [min,max] affinely onto
// [0,1]; without it, times must already live there.
std::vector<TickSeries> parse_ticks_csv(std::istream& in, bool normalize_time,
                                        const std::string& origin);
std::vector<TickSeries> read_ticks_csv(const std::string& path, bool normalize_time = false);

void write_ticks_csv(std::ostream& out, const std::vector<TickSeries>& series);
void write_ticks_csv(const std::string& path, const std::vector<TickSeries>& series);

} // namespace covest
