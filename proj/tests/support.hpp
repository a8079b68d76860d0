#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "csync/generator.hpp"
#include "csync/graph.hpp"
#include "csync/partition.hpp"

namespace csync::testing {

std::string data_path(const std::string& relative);

Network load_example(const std::string& name);
Partition load_cells(const Network& net, const std::string& name);

Network path3();

/// Cells as sorted node lists, sorted by first node.
std::vector<std::vector<NodeIndex>> canonical_cells(std::vector<std::vector<NodeIndex>> cells);

/// Every set partition of {0..n-1} (restricted growth strings).
std::vector<std::vector<std::vector<NodeIndex>>> all_set_partitions(std::size_t n);

/// Coarsest equitable partition by exhaustive search: the equitable set
/// partition with the fewest cells.
std::vector<std::vector<NodeIndex>> brute_force_coarsest(const Network& net);

/// Dimension of {P : PA = AP, PE_k = E_k P for all k} from the dense N^2
/// unknown system, by full-pivot LU rank.
std::size_t dense_commutant_dim(const Network& net, const std::vector<std::vector<NodeIndex>>& cells);

/// All connected labeled graphs on n nodes (every edge subset of K_n).
std::vector<Network> connected_graphs(std::size_t n);

/// sin of the largest principal angle between span(a) and span(b).
double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Random planted instance with N <= max_n, or nullopt if the draw was not
/// realizable.
std::optional<PlantedNetwork> random_planted(std::mt19937_64& rng, std::size_t max_n);

}  // namespace csync::testing
