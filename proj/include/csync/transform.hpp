#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csync/commutant.hpp"
#include "csync/partition.hpp"

namespace csync {

enum class BlockClass { parallel, transverse };

std::string_view to_string(BlockClass c);

/// Canonical SBD transformation. Rows of `t` follow the cluster-contiguous
/// node order of the IndicatorSet; columns are transformed coordinates,
/// permuted so that blocks are contiguous.
struct CanonicalTransform {
    std::vector<Eigen::MatrixXd> t_blocks;      ///< T_1..T_C, columns in cluster-local order
    Eigen::MatrixXd t;                          ///< N x N, block-diagonal up to column order
    std::vector<std::size_t> coord_perm;        ///< coord_perm[k] = cluster-major coordinate at position k
    std::vector<std::size_t> coord_cluster;     ///< cluster of each (permuted) coordinate
    Eigen::MatrixXd b;                          ///< T^T A T, unthresholded
    std::vector<std::size_t> block_sizes;
    std::vector<std::size_t> block_offsets;     ///< size r + 1
    std::vector<BlockClass> block_class;
    std::vector<std::vector<std::size_t>> block_clusters;
    std::vector<std::size_t> quotient_coords;   ///< one per cluster, indexed by cluster
    double eps_zero = 0.0;
    std::uint64_t seed = 0;

    std::size_t block_count() const noexcept { return block_sizes.size(); }
    std::size_t block_of(std::size_t coord) const;
};

CanonicalTransform build_transform(const IndicatorSet& ind, const CommutantElement& p, double eps_zero_rel = 1e-8);

/// Rows reordered to the original node numbering of `part`.
Eigen::MatrixXd transform_in_node_order(const CanonicalTransform& ct, const Partition& part);

struct BlockTuple {
    std::size_t index = 0;
    Eigen::MatrixXd b_hat;
    std::vector<Eigen::VectorXd> j_hats;  ///< C diagonal 0/1 vectors of length beta_k
    BlockClass block_class = BlockClass::transverse;
};

std::vector<BlockTuple> block_tuples(const CanonicalTransform& ct, const IndicatorSet& ind);

struct CanonicalReport {
    double orthogonality = 0.0;        ///< ||T^T T - I||_F
    double indicator_residual = 0.0;   ///< max_k ||T^T E_k T - J_k||_F
    double off_block_mass = 0.0;       ///< ||B outside the blocks||_F
    double constant_column = 0.0;      ///< max deviation of the quotient columns from n_k^{-1/2}
    double quotient_spectrum = 0.0;    ///< max |eig(parallel part of B) - eig(Q)|
    double quotient_closure = 0.0;     ///< ||B[non-quotient, quotient]||_F
    std::size_t parallel_size = 0;     ///< total size of the parallel blocks
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr double kCanonicalTol = 1e-8;

/// Residuals are recomputed from ct.t, so tampering with T is detected.
CanonicalReport verify_canonical(const CanonicalTransform& ct, const IndicatorSet& ind, double tol = kCanonicalTol);

struct ParameterCount {
    std::size_t p1 = 0;  ///< (C + 1) * sum beta_k (beta_k + 1) / 2
    std::size_t p2 = 0;  ///< sum beta_k (beta_k + 1) / 2
};

ParameterCount parameter_count(const std::vector<std::size_t>& block_sizes, std::size_t cluster_count);

}  // namespace csync
