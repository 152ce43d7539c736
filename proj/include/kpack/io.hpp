#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "kpack/detect.hpp"
#include "kpack/graph.hpp"

namespace kpack {

using json = nlohmann::ordered_json;

struct GraphFile {
  MultipartiteGraph graph;
  std::optional<PartitionLabeling> labels;
};

json graph_to_json(const MultipartiteGraph& g, const PartitionLabeling* labels = nullptr);
GraphFile graph_from_json(const json& j);

json vertex_to_json(const MultipartiteGraph& g, int u);
int vertex_from_json(const MultipartiteGraph& g, const json& j);

json packing_to_json(const MultipartiteGraph& g, const CliquePacking& m);
CliquePacking packing_from_json(const MultipartiteGraph& g, const json& j);
std::string index_key(const IndexSet& idx);

json sets_to_json(const MultipartiteGraph& g, const std::vector<std::vector<int>>& sets);
json labeling_to_json(const MultipartiteGraph& g, const PartitionLabeling& q);
json diagnosis_to_json(const MultipartiteGraph& g, const DiagnosisReport& rep);

json read_json_file(const std::string& path);
// Writes via a temporary file and rename so readers never see partial output.
void write_json_file(const std::string& path, const json& j);

}  // namespace kpack
