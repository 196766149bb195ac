#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgp/radial.hpp"

namespace kgp {

/// Shortest form with 17 significant digits, '.' decimal, locale independent.
std::string format_double(double x);

/// Writes to a sibling temporary file, then renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// CSV with header `r,<names...>`; every column must live on the grid of the first.
std::string profile_csv(const std::vector<std::string>& names, const std::vector<RadialFunction>& columns);

}  // namespace kgp
