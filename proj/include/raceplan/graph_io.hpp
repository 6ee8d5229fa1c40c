#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "raceplan/lattice.hpp"

namespace raceplan {

inline constexpr std::uint32_t kGraphFormatVersion = 1;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Little-endian container: "LATG", u32 version, params, raceline hash, the
/// embedded reference line, layers, nodes, edges (coefficients, scores and
/// sampled geometry), then an "GEND" trailer.
std::string serialize_graph(const Lattice& g);

/// Throws GraphFileError (bad magic), GraphVersionError, GraphTruncatedError,
/// or GraphHashError when `expected_hash` is given and differs.
Lattice deserialize_graph(std::string_view bytes, std::optional<std::uint64_t> expected_hash = std::nullopt);

void save_graph(const Lattice& g, const std::filesystem::path& path);
Lattice load_graph(const std::filesystem::path& path, std::optional<std::uint64_t> expected_hash = std::nullopt);

/// Loads a graph and verifies it was built from the given race-line file.
Lattice load_graph(const std::filesystem::path& path, const std::filesystem::path& raceline_csv);

}  // namespace raceplan
