// Copyright 2026 The crs-matching Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "crs/graph.hpp"
#include "json.hpp"

namespace crs {

using json = nlohmann::json;

inline json to_json(const GraphInstance& g) {
  json j;
  j["vertices"] = g.vertex_count;
  json edges = json::array();
  for (const Edge& e : g.edges) edges.push_back(json::array({e.u, e.v, e.x}));
  j["edges"] = std::move(edges);
  if (g.order) j["order"] = *g.order;
  if (g.bipartition) j["bipartition"] = *g.bipartition;
  if (g.symmetry) j["symmetry"] = *g.symmetry;
  return j;
}

inline GraphInstance instance_from_json(const json& j) {
  GraphInstance g;
  try {
    g.vertex_count = j.at("vertices").get<int>();
    for (const auto& row : j.at("edges")) {
      if (!row.is_array() || row.size() != 3) throw StructuralError("edge rows must be [u, v, x]");
      g.edges.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<double>()});
    }
    if (j.contains("order")) g.order = j["order"].get<std::vector<int>>();
    if (j.contains("bipartition")) g.bipartition = j["bipartition"].get<std::vector<int>>();
    if (j.contains("symmetry")) g.symmetry = j["symmetry"].get<std::vector<std::vector<int>>>();
  } catch (const json::exception& ex) {
    throw StructuralError(std::string("instance JSON: ") + ex.what());
  }
  g.check_structure();
  return g;
}

// "-" reads stdin.
inline GraphInstance read_instance(const std::string& path) {
  json j;
  try {
    if (path == "-") {
      j = json::parse(std::cin);
    } else {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open " + path);
      j = json::parse(in);
    }
  } catch (const json::parse_error& ex) {
    throw StructuralError(std::string("instance JSON: ") + ex.what());
  }
  return instance_from_json(j);
}

// Full round-trip precision for x values, which the reductions compare bitwise.
inline std::string dump_json(const json& j) { return j.dump(1); }

}  // namespace crs
