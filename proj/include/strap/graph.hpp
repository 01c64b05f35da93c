// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "strap/data.hpp"

namespace strap {

// Typed proximity adjacency. Neighbor lists hold vector indexes into the
// owning Dataset's tables, sorted ascending. resident_neighbors is symmetric
// and self-loop free; a pair appears iff its distance is <= radius_km.
struct HeteroGraph {
  double radius_km = 5.0;
  std::vector<std::vector<std::size_t>> resident_neighbors;
  std::vector<std::vector<std::size_t>> resident_amenities;
  std::vector<std::vector<std::size_t>> resident_stations;

  struct DegreeStats {
    double mean_rr = 0.0, mean_ra = 0.0, mean_rs = 0.0;
  };
  DegreeStats degree_stats() const;
};

// Grid-indexed construction of all three edge sets.
HeteroGraph build_hetero_graph(const Dataset& ds, double radius_km = 5.0);

// Writes edges_rr.csv / edges_ra.csv / edges_rs.csv ("src,dst" entity ids)
// for inspection.
void export_edges_csv(const HeteroGraph& g, const Dataset& ds, const std::string& dir);

}  // namespace strap
