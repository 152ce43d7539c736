#include "kpack/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kpack/errors.hpp"

namespace kpack {

json vertex_to_json(const MultipartiteGraph& g, int u) {
  auto v = g.vertex(u);
  return json::array({v.cls, v.off});
}

int vertex_from_json(const MultipartiteGraph& g, const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw PreconditionError("vertex must be [class, offset]");
  return g.id(j[0].get<int>(), j[1].get<int>());
}

json labeling_to_json(const MultipartiteGraph& g, const PartitionLabeling& q) {
  json part_of = json::array();
  for (int c = 0; c < g.r(); ++c) {
    json row = json::array();
    for (int u = g.class_begin(c); u < g.class_end(c); ++u) row.push_back(q.part_of[u]);
    part_of.push_back(row);
  }
  return json{{"d", q.d}, {"part_of", part_of}};
}

json graph_to_json(const MultipartiteGraph& g, const PartitionLabeling* labels) {
  json edges = json::array();
  for (auto [u, v] : g.edges()) edges.push_back(json::array({vertex_to_json(g, u), vertex_to_json(g, v)}));
  json out{{"r", g.r()}, {"class_sizes", g.class_sizes()}, {"edges", edges}};
  if (labels) out["labels"] = labeling_to_json(g, *labels);
  return out;
}

GraphFile graph_from_json(const json& j) {
  if (!j.is_object() || !j.contains("r") || !j.contains("class_sizes") || !j.contains("edges"))
    throw PreconditionError("graph file needs r, class_sizes and edges");
  int r = j.at("r").get<int>();
  auto sizes = j.at("class_sizes").get<std::vector<int>>();
  if (static_cast<int>(sizes.size()) != r) throw PreconditionError("class_sizes length differs from r");
  GraphFile out{MultipartiteGraph(sizes), std::nullopt};
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw PreconditionError("edge must be a pair of vertices");
    int u = vertex_from_json(out.graph, e[0]);
    int v = vertex_from_json(out.graph, e[1]);
    out.graph.add_edge(u, v);
  }
  if (j.contains("labels") && !j.at("labels").is_null()) {
    const auto& lab = j.at("labels");
    const auto& rows = lab.at("part_of");
    if (!rows.is_array() || static_cast<int>(rows.size()) != r)
      throw PreconditionError("labels.part_of needs one row per class");
    std::vector<int> part(out.graph.num_vertices());
    for (int c = 0; c < r; ++c) {
      if (static_cast<int>(rows[c].size()) != sizes[c]) throw PreconditionError("labels row has wrong length");
      for (int o = 0; o < sizes[c]; ++o) part[out.graph.id(c, o)] = rows[c][o].get<int>();
    }
    auto q = make_labeling(out.graph, std::move(part));
    if (lab.contains("d") && lab.at("d").get<int>() != q.d)
      throw PreconditionError("labels.d does not match the labels used");
    out.labels = std::move(q);
  }
  return out;
}

std::string index_key(const IndexSet& idx) {
  std::string s = "[";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(idx[i]);
  }
  return s + "]";
}

json packing_to_json(const MultipartiteGraph& g, const CliquePacking& m) {
  json cliques = json::array();
  for (const auto& c : m.cliques) {
    json row = json::array();
    for (int u : c) row.push_back(vertex_to_json(g, u));
    cliques.push_back(row);
  }
  json counts = json::object();
  for (const auto& [idx, cnt] : index_counts(g, m)) counts[index_key(idx)] = cnt;
  return json{{"cliques", cliques}, {"index_counts", counts}};
}

CliquePacking packing_from_json(const MultipartiteGraph& g, const json& j) {
  if (!j.is_object() || !j.contains("cliques")) throw PreconditionError("packing file needs cliques");
  CliquePacking m;
  for (const auto& row : j.at("cliques")) {
    Clique c;
    for (const auto& v : row) c.push_back(vertex_from_json(g, v));
    std::sort(c.begin(), c.end());
    m.cliques.push_back(std::move(c));
  }
  return m;
}

json sets_to_json(const MultipartiteGraph& g, const std::vector<std::vector<int>>& sets) {
  json out = json::array();
  for (const auto& s : sets) {
    json row = json::array();
    for (int u : s) row.push_back(g.vertex(u).off);
    out.push_back(row);
  }
  return out;
}

json diagnosis_to_json(const MultipartiteGraph& g, const DiagnosisReport& rep) {
  json out;
  if (rep.splittable) {
    out["splittable"] = json{{"p_prime", rep.splittable->p_prime},
                             {"sets", sets_to_json(g, rep.splittable->sets)},
                             {"achieved_min_density", to_string(rep.splittable->achieved_min_density)}};
  } else {
    out["splittable"] = nullptr;
  }
  if (rep.pair_complete) {
    out["pair_complete"] = json{{"halves", sets_to_json(g, rep.pair_complete->halves)},
                                {"min_inside", to_string(rep.pair_complete->min_inside)},
                                {"min_outside", to_string(rep.pair_complete->min_outside)},
                                {"max_cross", to_string(rep.pair_complete->max_cross)}};
  } else {
    out["pair_complete"] = nullptr;
  }
  json space = json::array();
  for (const auto& c : rep.space)
    space.push_back(json{{"j", c.j}, {"S", sets_to_json(g, c.S)}, {"violating", c.violating}, {"source", c.source}});
  out["space"] = space;
  json div = json::array();
  for (const auto& c : rep.divisibility)
    div.push_back(json{{"partition", labeling_to_json(g, c.q)},
                       {"violating_pair", json::array({c.violating_pair.first, c.violating_pair.second})},
                       {"minimal", labeling_to_json(g, c.minimal)},
                       {"source", c.source}});
  out["divisibility"] = div;
  out["space_exhaustive"] = rep.space_exhaustive;
  out["divisibility_exhaustive"] = rep.divisibility_exhaustive;
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw PreconditionError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw PreconditionError("cannot write " + path);
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace kpack
