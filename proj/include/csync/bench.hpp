#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "csync/baseline.hpp"
#include "csync/generator.hpp"
#include "csync/pipeline.hpp"

namespace csync {

struct BenchInstance {
    std::string name;
    Network network;
    Partition partition;
};

/// Planted network with cells of the given sizes and the remaining nodes as
/// singletons. Cells have internal degree 2 (1 for pairs), every other cell
/// is matched to the next cell of equal size, and singletons hang off a
/// random tree with two of them joined to every node of each cell.
PlantedSpec planted_bench_spec(std::size_t n, const std::vector<std::size_t>& cell_sizes, std::uint64_t seed);

BenchInstance planted_bench_instance(std::size_t n, const std::vector<std::size_t>& cell_sizes, std::uint64_t seed);

/// N = 100, 200, 400 with 12, 16 and 20 cells of sizes cycling 2, 3, 4, 6.
std::vector<BenchInstance> desk_scale_instances(std::uint64_t seed = 1);

struct BenchOptions {
    int repeats = 3;
    bool warmup = true;
    SbdOptions sbd;
    BaselineOptions baseline;
};

struct BenchRecord {
    std::string name;
    std::size_t n = 0;
    std::size_t edges = 0;
    std::size_t nontrivial = 0;
    std::size_t max_cluster = 0;
    double t_canonical = 0.0;  ///< median seconds
    double t_baseline = 0.0;
    std::vector<std::size_t> blocks_canonical;  ///< descending
    std::vector<std::size_t> blocks_baseline;
    bool blocks_agree = false;
    std::size_t canonical_unknowns = 0;  ///< sum n_i^2
    std::size_t baseline_unknowns = 0;   ///< N^2
    std::size_t baseline_iterations = 0;
    std::string error;
};

/// One instance at a time; a failing instance is recorded and the run goes on.
std::vector<BenchRecord> run_bench(const std::vector<BenchInstance>& instances, const BenchOptions& options = {});

inline constexpr const char* kBenchCsvHeader = "name,N,E,N_ntc,max_cluster,t_baseline_s,t_canonical_s,blocks_agree";

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace csync
