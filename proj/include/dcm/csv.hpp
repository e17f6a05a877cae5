#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcm {

// 17 significant digits; round-trips exactly through strtod.
[[nodiscard]] std::string format_double(double x);

// Splits one CSV line on commas, trimming spaces.
[[nodiscard]] std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace dcm
