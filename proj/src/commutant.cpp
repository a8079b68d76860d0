#include "csync/commutant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "csync/errors.hpp"
#include "csync/kernels.hpp"

namespace csync {

namespace {

using kernels::ConstMatrixRef;
using kernels::MatrixRef;

ConstMatrixRef cref(const Eigen::MatrixXd& m) {
    return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
            static_cast<std::size_t>(m.outerStride())};
}

MatrixRef block_ref(Eigen::MatrixXd& m, std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) {
    return {m.data() + c0 * static_cast<std::size_t>(m.outerStride()) + r0, rows, cols,
            static_cast<std::size_t>(m.outerStride())};
}

std::vector<std::size_t> var_offsets_for(const std::vector<std::size_t>& sizes) {
    std::vector<std::size_t> off(sizes.size() + 1, 0);
    for (std::size_t i = 0; i < sizes.size(); ++i) off[i + 1] = off[i] + sizes[i] * sizes[i];
    return off;
}

Eigen::MatrixXd sub_block(const IndicatorSet& ind, std::size_t i, std::size_t j) {
    return ind.adjacency.block(static_cast<Eigen::Index>(ind.offsets[i]), static_cast<Eigen::Index>(ind.offsets[j]),
                               static_cast<Eigen::Index>(ind.sizes[i]), static_cast<Eigen::Index>(ind.sizes[j]));
}

}  // namespace

CommutantProblem assemble_problem(const IndicatorSet& ind) {
    CommutantProblem prob;
    prob.sizes = ind.sizes;
    prob.var_offsets = var_offsets_for(ind.sizes);
    const std::size_t c = ind.cluster_count();
    prob.n_cols = prob.var_offsets.back();
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) prob.n_rows += ind.sizes[i] * ind.sizes[j];

    const auto nc = static_cast<Eigen::Index>(prob.n_cols);
    prob.sts = Eigen::MatrixXd::Zero(nc, nc);
    const auto& table = kernels::active();

    // Row block (i, j) of S is [X at P_i, -Y at P_j] with X = A_ij^T (x) I_ni
    // and Y = I_nj (x) A_ij; its Gram contribution is
    //   (i,i) += A_ij A_ij^T (x) I,   (j,j) += I (x) A_ij^T A_ij,
    //   (i,j) -= A_ij (x) A_ij,       (j,i) -= A_ij^T (x) A_ij^T.
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const Eigen::MatrixXd aij = sub_block(ind, i, j);
            if (aij.isZero(0.0)) continue;
            const std::size_t ni = ind.sizes[i], nj = ind.sizes[j];
            const Eigen::MatrixXd aat = aij * aij.transpose();
            const Eigen::MatrixXd ata = aij.transpose() * aij;
            const Eigen::MatrixXd aijt = aij.transpose();
            const Eigen::MatrixXd id_i = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(ni));
            const Eigen::MatrixXd id_j = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nj), static_cast<Eigen::Index>(nj));
            const std::size_t oi = prob.var_offsets[i], oj = prob.var_offsets[j];

            kernels::kron_accumulate(1.0, cref(aat), cref(id_i), block_ref(prob.sts, oi, oi, ni * ni, ni * ni), table);
            kernels::kron_accumulate(1.0, cref(id_j), cref(ata), block_ref(prob.sts, oj, oj, nj * nj, nj * nj), table);
            kernels::kron_accumulate(-1.0, cref(aij), cref(aij), block_ref(prob.sts, oi, oj, ni * ni, nj * nj), table);
            kernels::kron_accumulate(-1.0, cref(aijt), cref(aijt), block_ref(prob.sts, oj, oi, nj * nj, ni * ni), table);
        }
    }
    return prob;
}

Eigen::MatrixXd assemble_explicit_s(const IndicatorSet& ind) {
    const auto off = var_offsets_for(ind.sizes);
    const std::size_t c = ind.cluster_count();
    std::size_t n_rows = 0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) n_rows += ind.sizes[i] * ind.sizes[j];
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(off.back()));

    std::size_t row = 0;
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const Eigen::MatrixXd aij = sub_block(ind, i, j);
            const std::size_t ni = ind.sizes[i], nj = ind.sizes[j];
            const Eigen::MatrixXd id_i = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(ni));
            const Eigen::MatrixXd id_j = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nj), static_cast<Eigen::Index>(nj));
            const Eigen::MatrixXd aijt = aij.transpose();
            kernels::kron_accumulate(1.0, cref(aijt), cref(id_i), block_ref(s, row, off[i], ni * nj, ni * ni));
            kernels::kron_accumulate(-1.0, cref(id_j), cref(aij), block_ref(s, row, off[j], ni * nj, nj * nj));
            row += ni * nj;
        }
    }
    return s;
}

std::vector<Eigen::MatrixXd> CommutantBasis::element(std::size_t j) const {
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto n = static_cast<Eigen::Index>(sizes[i]);
        blocks.emplace_back(Eigen::Map<const Eigen::MatrixXd>(
            vectors.col(static_cast<Eigen::Index>(j)).data() + var_offsets[i], n, n));
    }
    return blocks;
}

Eigen::VectorXd CommutantBasis::spectrum_tail() const {
    const Eigen::Index k = std::min<Eigen::Index>(2 * static_cast<Eigen::Index>(dim()), sts_spectrum.size());
    return sts_spectrum.head(k);
}

namespace {

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

/// Subspace iteration with (S^T S + shift I)^{-1} for the d eigenvectors at
/// or below the threshold. Eigenvalues there map to ~1/shift and the rest to
/// at most 1/(lambda_{d+1} + shift), so a clear gap converges in a few steps.
/// Returns false when the result cannot be trusted.
bool shift_invert_vectors(const Eigen::MatrixXd& sts, Eigen::Index d, double threshold, double lambda_max,
                          Eigen::MatrixXd& out) {
    constexpr int kMaxIterations = 60;
    const double shift = std::max(threshold, 1e-12 * lambda_max);
    Eigen::MatrixXd m = sts;
    m.diagonal().array() += shift;
    const Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;

    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(sts.rows(), d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = normal(rng);
    x = orthonormal_columns(x);

    const double tol = 1e-14 * lambda_max;
    double prev = std::numeric_limits<double>::infinity();
    double residual = prev;
    Eigen::MatrixXd ax, h;
    for (int it = 0; it < kMaxIterations; ++it) {
        x = orthonormal_columns(llt.solve(x));
        ax.noalias() = sts * x;
        h.noalias() = x.transpose() * ax;
        residual = (ax - x * h).norm();
        if (residual <= tol || residual > 0.5 * prev) break;
        prev = residual;
    }

    // Rayleigh-Ritz so the columns are eigenvectors, ascending like the dense path
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (h + h.transpose()));
    if (ritz.info() != Eigen::Success || ritz.eigenvalues().maxCoeff() > threshold) return false;
    if (residual > 1e-10 * lambda_max) return false;
    out = x * ritz.eigenvectors();
    return true;
}

}  // namespace

CommutantBasis nullspace(const CommutantProblem& problem, double tol_rel, NullspaceVectors method) {
    if (!(tol_rel > 0.0)) throw ValidationError("nullspace tolerance must be positive");
    const bool want_iterative =
        method == NullspaceVectors::shift_invert ||
        (method == NullspaceVectors::automatic && problem.n_cols > kDenseVectorLimit);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        problem.sts, want_iterative ? Eigen::EigenvaluesOnly : Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition of S^T S did not converge");

    CommutantBasis basis;
    basis.sizes = problem.sizes;
    basis.var_offsets = problem.var_offsets;
    basis.sts_spectrum = solver.eigenvalues();
    const double lambda_max = basis.sts_spectrum.size() ? basis.sts_spectrum.maxCoeff() : 0.0;
    basis.threshold = tol_rel * std::max(lambda_max, 0.0);

    Eigen::Index d = 0;
    while (d < basis.sts_spectrum.size() && basis.sts_spectrum(d) <= basis.threshold) ++d;
    if (d == 0) {
        std::ostringstream msg;
        msg << "empty commutant nullspace (threshold " << basis.threshold << "); smallest eigenvalues:";
        for (Eigen::Index k = 0; k < std::min<Eigen::Index>(6, basis.sts_spectrum.size()); ++k)
            msg << ' ' << basis.sts_spectrum(k);
        throw NumericalError(msg.str());
    }
    if (!want_iterative) {
        basis.vectors = solver.eigenvectors().leftCols(d);
        return basis;
    }
    if (lambda_max > 0.0 && shift_invert_vectors(problem.sts, d, basis.threshold, lambda_max, basis.vectors)) {
        basis.iterative = true;
        return basis;
    }
    solver.compute(problem.sts);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition of S^T S did not converge");
    basis.vectors = solver.eigenvectors().leftCols(d);
    return basis;
}

Eigen::MatrixXd CommutantElement::dense() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.rows();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
        p.block(off, off, b.rows(), b.cols()) = b;
        off += b.rows();
    }
    return p;
}

namespace {

struct GapStats {
    double min_ratio = std::numeric_limits<double>::infinity();
    bool fully_degenerate = true;
};

GapStats gap_stats(const std::vector<Eigen::MatrixXd>& blocks) {
    std::vector<Eigen::VectorXd> values;
    double scale = 0.0;
    for (const auto& b : blocks) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
        values.push_back(es.eigenvalues());
        if (es.eigenvalues().size()) scale = std::max(scale, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    const double tol = kEigenGroupRel * scale;
    GapStats stats;
    for (const auto& ev : values) {
        if (ev.size() < 2) continue;
        const double spread = ev(ev.size() - 1) - ev(0);
        if (spread <= tol) continue;
        stats.fully_degenerate = false;
        for (Eigen::Index k = 1; k < ev.size(); ++k) {
            const double gap = ev(k) - ev(k - 1);
            if (gap > tol) stats.min_ratio = std::min(stats.min_ratio, gap / spread);
        }
    }
    return stats;
}

/// Pinches P_i against the projector onto the constant vector: for an
/// equitable partition that projector commutes with A and every E_k, so the
/// result stays in the commutant and has the constant vector as an exact
/// eigenvector even when the cell's commutant block is large.
Eigen::MatrixXd pin_constant(const Eigen::MatrixXd& p) {
    const Eigen::Index n = p.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    const Eigen::VectorXd row_mean = p.rowwise().sum() * inv_n;
    const Eigen::VectorXd col_mean = p.colwise().sum().transpose() * inv_n;
    const double mean = p.sum() * inv_n * inv_n;
    // (I - J) P (I - J) + J P J with J = 11^T / n
    Eigen::MatrixXd out = p;
    out.colwise() -= row_mean;
    out.rowwise() -= col_mean.transpose();
    out.array() += 2.0 * mean;
    return out;
}

}  // namespace

CommutantElement sample_element(const CommutantBasis& basis, std::uint64_t seed, double gap_tol, int max_retries) {
    if (basis.dim() == 0) throw ValidationError("cannot sample from an empty commutant basis");
    CommutantElement best;
    best.min_gap_ratio = -1.0;
    int made = 0;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        ++made;
        const std::uint64_t draw_seed = seed + static_cast<std::uint64_t>(attempt);
        std::mt19937_64 rng(draw_seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd coeff(static_cast<Eigen::Index>(basis.dim()));
        for (Eigen::Index j = 0; j < coeff.size(); ++j) coeff(j) = normal(rng);
        const Eigen::VectorXd p = basis.vectors * coeff;

        CommutantElement el;
        el.seed = draw_seed;
        for (std::size_t i = 0; i < basis.sizes.size(); ++i) {
            const auto n = static_cast<Eigen::Index>(basis.sizes[i]);
            const Eigen::Map<const Eigen::MatrixXd> block(p.data() + basis.var_offsets[i], n, n);
            // mirror the lower triangle, which is what the eigensolver reads
            Eigen::MatrixXd pinned = pin_constant(0.5 * (block + block.transpose()));
            el.blocks.emplace_back(pinned.selfadjointView<Eigen::Lower>());
        }
        const GapStats stats = gap_stats(el.blocks);
        el.min_gap_ratio = stats.min_ratio;
        el.fully_degenerate = stats.fully_degenerate;
        if (el.min_gap_ratio > best.min_gap_ratio) best = std::move(el);
        if (best.min_gap_ratio >= gap_tol) break;
    }
    best.attempts = made;
    return best;
}

double commutation_residual(const CommutantElement& p, const Eigen::MatrixXd& adjacency) {
    const Eigen::MatrixXd dense = p.dense();
    return (dense * adjacency - adjacency * dense).norm();
}

}  // namespace csync
