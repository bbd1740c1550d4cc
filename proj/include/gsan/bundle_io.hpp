#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "gsan/graph.hpp"

namespace gsan {

// Bundle directory layout:
//   meta.json     {"n": int, "num_classes": int, "has_features": bool}
//   edges.csv     one "u,v" per line, 0-indexed, u < v, no duplicates
//   features.csv  n rows of d comma-separated reals (only if has_features)
//   labels.csv    n lines of integer class ids (optional)
//   splits.json   {"train": [...], "val": [...], "test": [...]}
//   poison.json   optional sidecar {"inserted": [[u,v],...], "deleted": [[u,v],...]}
//
// The writer is canonical: save(load(dir)) reproduces a canonically written
// directory byte for byte.
GraphBundle load_bundle(const std::filesystem::path& dir);
void save_bundle(const GraphBundle& bundle, const std::filesystem::path& dir);

PoisonRecord load_poison(const std::filesystem::path& file);
void save_poison(const PoisonRecord& record, const std::filesystem::path& file);
// Reads dir/poison.json when it exists.
std::optional<PoisonRecord> load_poison_sidecar(const std::filesystem::path& dir);

nlohmann::json edges_to_json(const EdgeSet& edges);
template <typename Range>
nlohmann::json edge_list_to_json(const Range& edges) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Edge& e : edges) arr.push_back({e.u, e.v});
  return arr;
}
// Throws FormatError (file, line of the value) on malformed pairs.
EdgeSet edges_from_json(const nlohmann::json& arr, const std::string& file);

// Parses a JSON document, converting parse errors into FormatError with a line number.
nlohmann::json parse_json_file(const std::filesystem::path& file);

}  // namespace gsan
