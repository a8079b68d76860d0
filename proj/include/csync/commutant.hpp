#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "csync/partition.hpp"

namespace csync {

/// The constraint system P_i A_ij - A_ij P_j = 0 over the block-diagonal
/// unknown P = diag(P_1..P_C), stored through its Gram matrix S^T S.
///
/// Unknowns are laid out as [vec(P_1); ...; vec(P_C)] with column-major vec,
/// so entry (a, b) of P_i sits at var_offsets[i] + a + b * n_i.
struct CommutantProblem {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> var_offsets;  ///< size C + 1
    std::size_t n_rows = 0;                ///< N_r = sum_ij n_i n_j
    std::size_t n_cols = 0;                ///< N_c = sum_i n_i^2
    Eigen::MatrixXd sts;                   ///< N_c x N_c
};

/// Accumulates S^T S pair by pair without forming S.
CommutantProblem assemble_problem(const IndicatorSet& ind);

/// The stacked S = [S_1; S_2] itself, rows ordered by (i, j) pair. Only
/// sensible for small networks; used to cross-check the Gram path.
Eigen::MatrixXd assemble_explicit_s(const IndicatorSet& ind);

struct CommutantBasis {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> var_offsets;
    Eigen::MatrixXd vectors;       ///< N_c x d, orthonormal columns
    Eigen::VectorXd sts_spectrum;  ///< all eigenvalues of S^T S, ascending
    double threshold = 0.0;        ///< eigenvalues <= threshold were kept
    bool iterative = false;        ///< vectors came from shift-invert iteration

    std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors.cols()); }
    /// Blocks P_1..P_C of basis element j.
    std::vector<Eigen::MatrixXd> element(std::size_t j) const;
    /// The smallest min(2d, N_c) eigenvalues of S^T S.
    Eigen::VectorXd spectrum_tail() const;
};

/// How the kept eigenvectors are obtained. The spectrum is always computed
/// densely; `shift_invert` then runs subspace iteration on a Cholesky factor
/// of S^T S + threshold * I instead of accumulating all N_c eigenvectors,
/// and falls back to the dense solver if it does not converge.
enum class NullspaceVectors { automatic, dense, shift_invert };

/// N_c above which `automatic` picks shift-invert.
inline constexpr std::size_t kDenseVectorLimit = 1000;

/// Eigenvectors of S^T S with eigenvalue <= tol_rel * lambda_max. Throws
/// NumericalError if nothing qualifies (the identity must always be found).
CommutantBasis nullspace(const CommutantProblem& problem, double tol_rel = 1e-9,
                         NullspaceVectors method = NullspaceVectors::automatic);

struct CommutantElement {
    std::vector<Eigen::MatrixXd> blocks;  ///< symmetric P_1..P_C
    std::uint64_t seed = 0;               ///< seed of the returned draw
    int attempts = 1;
    /// Smallest non-degenerate eigenvalue gap over all blocks, relative to
    /// that block's spread. +inf when no block has two distinct eigenvalues.
    double min_gap_ratio = 0.0;
    /// Every block is a multiple of the identity.
    bool fully_degenerate = false;

    Eigen::MatrixXd dense() const;
};

/// Relative tolerance under which two eigenvalues of P are treated as one
/// eigenvalue (structural degeneracy).
inline constexpr double kEigenGroupRel = 1e-8;

/// Random symmetric element sum_j c_j M_j, c_j ~ N(0, 1), with each block
/// pinched so the constant vector is an eigenvector (valid because the
/// partition is equitable). Redraws with seed + attempt while min_gap_ratio
/// < gap_tol, keeping the best draw.
CommutantElement sample_element(const CommutantBasis& basis, std::uint64_t seed, double gap_tol = 1e-6,
                                int max_retries = 5);

/// ||P A - A P||_F for P = diag(blocks) and A in cluster-contiguous order.
double commutation_residual(const CommutantElement& p, const Eigen::MatrixXd& adjacency);

}  // namespace csync
