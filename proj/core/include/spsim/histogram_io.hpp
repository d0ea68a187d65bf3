#pragma once

#include "spsim/analytics.hpp"

#include <iosfwd>
#include <string>

namespace spsim {

/*
 Histogram text format: '#' lines are comments; the first data line holds
   <bin_width> <period> <center_index>
 and every following line one integer bin count. Parse errors report the
 offending line number.
*/
HbtHistogram read_histogram(std::istream& in, const std::string& name = "<stream>");
HbtHistogram read_histogram_file(const std::string& path);
void write_histogram(std::ostream& out, const HbtHistogram& histogram);
void write_histogram_file(const std::string& path, const HbtHistogram& histogram);

}  // namespace spsim
