#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "csync/graph.hpp"
#include "csync/partition.hpp"

namespace csync {

/// Random simple graph with a planted equitable partition: every node of cell
/// k has exactly degrees[k][l] neighbours in cell l.
struct PlantedSpec {
    std::vector<std::size_t> sizes;
    std::vector<std::vector<std::size_t>> degrees;
    std::uint64_t seed = 0;
    /// Restarts of the randomized placement per cell pair before giving up.
    int max_retries = 100;
    /// Shuffle node ids so cells are not contiguous ranges.
    bool shuffle_nodes = true;
};

struct PlantedNetwork {
    Network network;
    Partition partition;
};

/// Throws ValidationError naming the first violated constraint.
void check_planted_feasible(const PlantedSpec& spec);

PlantedNetwork generate_planted(const PlantedSpec& spec);

}  // namespace csync
