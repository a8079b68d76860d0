#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "csync/commutant.hpp"
#include "csync/graph.hpp"
#include "csync/partition.hpp"
#include "csync/transform.hpp"

namespace csync {

struct SbdOptions {
    std::uint64_t seed = 0;
    double tol_rel = 1e-9;       ///< nullspace threshold relative to lambda_max(S^T S)
    double eps_zero_rel = 1e-8;  ///< block-detection threshold relative to ||A||_F
    double gap_tol = 1e-6;
    int max_retries = 5;
    /// Run verify_canonical; the bench turns this off to time T alone.
    bool verify = true;

    void validate() const;
};

struct SbdResult {
    Partition partition;
    IndicatorSet indicators;
    std::size_t n_rows = 0;  ///< N_r
    std::size_t n_cols = 0;  ///< N_c
    CommutantBasis basis;
    CommutantElement element;
    CanonicalTransform transform;
    CanonicalReport report;
    ParameterCount params;
};

/// Partition -> indicators -> S^T S -> nullspace -> P -> T.
SbdResult run_canonical_sbd(const Network& net, const Partition& part, const SbdOptions& options = {});

struct SeedConsistency {
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<std::size_t>> block_multisets;  ///< sorted descending, per seed
    std::vector<std::vector<std::vector<std::size_t>>> cluster_multisets;
    bool consistent = true;
};

/// Reruns the transform step with seeds seed, seed+1000, ... and compares
/// block-size and per-block cluster-content multisets.
SeedConsistency verify_with_seeds(const Network& net, const Partition& part, const SbdOptions& options, std::size_t k);

}  // namespace csync
