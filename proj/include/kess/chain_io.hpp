#pragma once

#include <filesystem>

#include "kess/geometry.hpp"

namespace kess {

/// Reads a chain file. Format:
///   #% manifold=<sphere|spd|grassmann|correlation|euclidean> dims=<d[,p]>
///   # comment lines start with '#'
///   v1,v2,...,vk            one flattened row-major point per line
/// Rows are validated against the declared manifold; errors carry the
/// 1-based line number. Row order is time order.
Chain read_chain(const std::filesystem::path& path);

/// Writes the directive header and one comma-separated row per point at 17
/// significant digits, which round-trips doubles exactly. Atomic
/// (temp file + rename).
void write_chain(const std::filesystem::path& path, const Chain& chain);

}  // namespace kess
