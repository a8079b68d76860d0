#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "csync/graph.hpp"
#include "csync/partition.hpp"

namespace csync {

/// Full-commutant SBD over all N^2 entries of P, with no use of the
/// cluster block structure of the commutant. The commutation operator
///   L(X) = ([X, A], [X, E_1], ..., [X, E_C])
/// is applied matrix-free and a random symmetric X0 is driven into
/// null(L^T L) by Jacobi-preconditioned conjugate gradients.
struct BaselineOptions {
    std::uint64_t seed = 0;
    double eps_zero_rel = 1e-8;
    double residual_tol = 1e-14;  ///< stop when ||L(P)|| <= tol * ||A||_F * ||P||_F
    std::size_t max_iterations = 50000;
};

struct BaselineResult {
    Eigen::MatrixXd t;                      ///< N x N, rows in original node order
    std::vector<std::size_t> block_sizes;   ///< descending
    std::vector<std::size_t> coord_block;   ///< component of each column of t, numbered in first-seen order
    std::size_t unknowns = 0;               ///< N^2
    std::size_t iterations = 0;
    double residual = 0.0;                  ///< ||L(P)||_F / (||A||_F ||P||_F)
};

BaselineResult baseline_sbd(const Network& net, const Partition& part, const BaselineOptions& options = {});

}  // namespace csync
