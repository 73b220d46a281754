#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace railagent {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Lower-cases, replaces punctuation with spaces and collapses runs of
/// whitespace. Used for every name lookup (stations, cities, dishes).
std::string normalize_name(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> tokens(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep = ", ");

bool starts_with_ci(std::string_view s, std::string_view prefix);

/// Jaccard overlap of the normalized token sets of two names.
double token_overlap(std::string_view a, std::string_view b);

}  // namespace railagent
