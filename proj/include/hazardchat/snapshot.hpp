#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hazardchat/graph.hpp"

namespace hazardchat::graph {

class IoFailure : public GraphError {
public:
    using GraphError::GraphError;
};

class CorruptSnapshot : public GraphError {
public:
    using GraphError::GraphError;
};

inline constexpr std::string_view kSnapshotMagic = "HAZARDCHAT-SNAPSHOT";
inline constexpr int kSnapshotVersion = 1;

/// Header line, then one compact JSON record per node and per edge. See
/// docs/snapshot_format.md for the byte-level layout.
std::string serialize_snapshot(const PropertyGraph& graph);

/// Throws CorruptSnapshot on any header, checksum, count or record problem.
PropertyGraph parse_snapshot(std::string_view bytes);

/// Hex FNV-1a 64 of the snapshot body; what the header carries.
std::string snapshot_checksum(const PropertyGraph& graph);

/// Writes to a sibling temporary file and renames it into place.
void save_snapshot(const PropertyGraph& graph, const std::filesystem::path& path);

PropertyGraph load_snapshot(const std::filesystem::path& path);

}  // namespace hazardchat::graph
