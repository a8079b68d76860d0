#include "csync/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csync/errors.hpp"

namespace csync {

std::string_view to_string(BlockClass c) { return c == BlockClass::parallel ? "parallel" : "transverse"; }

std::size_t CanonicalTransform::block_of(std::size_t coord) const {
    const auto it = std::upper_bound(block_offsets.begin(), block_offsets.end(), coord);
    return static_cast<std::size_t>(it - block_offsets.begin()) - 1;
}

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

/// Flips the column so its largest-magnitude entry is positive. Entries
/// within 1e-12 of the maximum count as ties; the first one decides.
void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> col) {
    const double m = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
        if (std::fabs(col(i)) >= m - 1e-12) {
            if (col(i) < 0) col = -col;
            return;
        }
    }
}

/// Eigenvectors of one cluster block with the exact constant vector rotated
/// into its eigenspace. Returns the local column holding that vector.
std::size_t cluster_basis(const Eigen::MatrixXd& block, double group_tol, std::size_t cluster, Eigen::MatrixXd& out) {
    const Eigen::Index n = block.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of a commutant block failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    out = es.eigenvectors();

    std::vector<std::pair<Eigen::Index, Eigen::Index>> groups;  // [begin, end)
    for (Eigen::Index k = 0; k < n;) {
        Eigen::Index e = k + 1;
        while (e < n && ev(e) - ev(e - 1) <= group_tol) ++e;
        groups.emplace_back(k, e);
        k = e;
    }

    const Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::size_t best = 0;
    double best_proj = -1.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto [b, e] = groups[g];
        const double proj = (out.middleCols(b, e - b).transpose() * u).norm();
        if (proj > best_proj) {
            best_proj = proj;
            best = g;
        }
    }
    if (best_proj <= 0.5) {
        std::ostringstream msg;
        msg << "constant direction not found in any eigenspace of cluster " << (cluster + 1)
            << " (best projection " << best_proj << ")";
        throw NumericalError(msg.str());
    }

    const auto [b, e] = groups[best];
    const Eigen::Index g = e - b;
    Eigen::MatrixXd rotated(n, g);
    rotated.col(0) = u;
    if (g > 1) {
        const Eigen::MatrixXd v = out.middleCols(b, g);
        const Eigen::MatrixXd w = v - u * (u.transpose() * v);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU);
        rotated.rightCols(g - 1) = svd.matrixU().leftCols(g - 1);
    }
    out.middleCols(b, g) = rotated;
    for (Eigen::Index k = 0; k < n; ++k)
        if (k != b) canonicalize_sign(out.col(k));
    return static_cast<std::size_t>(b);
}

}  // namespace

CanonicalTransform build_transform(const IndicatorSet& ind, const CommutantElement& p, double eps_zero_rel) {
    const std::size_t c = ind.cluster_count();
    const std::size_t n = ind.node_count();
    if (p.blocks.size() != c) throw ValidationError("commutant element does not match the partition");
    if (!(eps_zero_rel > 0.0)) throw ValidationError("eps_zero must be positive");

    double scale = 0.0;
    for (const auto& blk : p.blocks) scale = std::max(scale, blk.cwiseAbs().maxCoeff());
    // Eigenvalue magnitudes are bounded by n * max|entry|; use the spectral
    // radius of the largest block for the grouping scale.
    double radius = 0.0;
    for (const auto& blk : p.blocks) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk, Eigen::EigenvaluesOnly);
        radius = std::max(radius, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    const double group_tol = kEigenGroupRel * (radius > 0.0 ? radius : scale);

    CanonicalTransform ct;
    ct.seed = p.seed;
    ct.t_blocks.resize(c);
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd t_major = Eigen::MatrixXd::Zero(ni, ni);
    std::vector<std::size_t> quotient_major(c);
    for (std::size_t k = 0; k < c; ++k) {
        if (static_cast<std::size_t>(p.blocks[k].rows()) != ind.sizes[k])
            throw ValidationError("commutant block size does not match cluster size");
        const std::size_t local = cluster_basis(p.blocks[k], group_tol, k, ct.t_blocks[k]);
        const auto ti = ct.t_blocks[k];
        const double ortho = (ti.transpose() * ti - Eigen::MatrixXd::Identity(ti.rows(), ti.cols())).norm();
        if (ortho > 1e-10)
            throw NumericalError("block T_" + std::to_string(k + 1) + " is not orthogonal (" + std::to_string(ortho) + ")");
        const auto off = static_cast<Eigen::Index>(ind.offsets[k]);
        t_major.block(off, off, ti.rows(), ti.cols()) = ti;
        quotient_major[k] = ind.offsets[k] + local;
    }

    const Eigen::MatrixXd b_major = t_major.transpose() * ind.adjacency * t_major;
    ct.eps_zero = eps_zero_rel * ind.adjacency.norm();

    DisjointSets sets(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (std::fabs(b_major(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v))) > ct.eps_zero)
                sets.unite(u, v);

    std::vector<std::vector<std::size_t>> blocks;
    {
        std::vector<std::size_t> root_to_block(n, n);
        for (std::size_t u = 0; u < n; ++u) {
            const std::size_t r = sets.find(u);
            if (root_to_block[r] == n) {
                root_to_block[r] = blocks.size();
                blocks.emplace_back();
            }
            blocks[root_to_block[r]].push_back(u);
        }
    }
    std::vector<bool> is_quotient(n, false);
    for (std::size_t q : quotient_major) is_quotient[q] = true;
    auto parallel = [&](const std::vector<std::size_t>& blk) {
        return std::any_of(blk.begin(), blk.end(), [&](std::size_t u) { return is_quotient[u]; });
    };
    std::stable_sort(blocks.begin(), blocks.end(), [&](const auto& x, const auto& y) {
        const bool px = parallel(x), py = parallel(y);
        if (px != py) return px;
        if (x.size() != y.size()) return x.size() > y.size();
        return x.front() < y.front();
    });

    std::vector<std::size_t> position(n);
    ct.block_offsets.push_back(0);
    for (const auto& blk : blocks) {
        ct.block_sizes.push_back(blk.size());
        ct.block_class.push_back(parallel(blk) ? BlockClass::parallel : BlockClass::transverse);
        std::vector<std::size_t> clusters;
        for (std::size_t u : blk) {
            position[u] = ct.coord_perm.size();
            ct.coord_perm.push_back(u);
            clusters.push_back(ind.coord_cluster[u]);
        }
        std::sort(clusters.begin(), clusters.end());
        clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
        ct.block_clusters.push_back(std::move(clusters));
        ct.block_offsets.push_back(ct.coord_perm.size());
    }

    ct.t.resize(ni, ni);
    ct.b.resize(ni, ni);
    ct.coord_cluster.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(ct.coord_perm[k]);
        ct.t.col(static_cast<Eigen::Index>(k)) = t_major.col(src);
        ct.coord_cluster[k] = ind.coord_cluster[ct.coord_perm[k]];
        for (std::size_t l = 0; l < n; ++l)
            ct.b(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                b_major(src, static_cast<Eigen::Index>(ct.coord_perm[l]));
    }
    ct.quotient_coords.resize(c);
    for (std::size_t k = 0; k < c; ++k) ct.quotient_coords[k] = position[quotient_major[k]];
    return ct;
}

Eigen::MatrixXd transform_in_node_order(const CanonicalTransform& ct, const Partition& part) {
    Eigen::MatrixXd out(ct.t.rows(), ct.t.cols());
    for (std::size_t v = 0; v < part.node_count(); ++v)
        out.row(static_cast<Eigen::Index>(v)) = ct.t.row(static_cast<Eigen::Index>(part.position()[v]));
    return out;
}

std::vector<BlockTuple> block_tuples(const CanonicalTransform& ct, const IndicatorSet& ind) {
    std::vector<BlockTuple> tuples;
    const std::size_t c = ind.cluster_count();
    for (std::size_t k = 0; k < ct.block_count(); ++k) {
        BlockTuple tuple;
        tuple.index = k;
        tuple.block_class = ct.block_class[k];
        const auto off = static_cast<Eigen::Index>(ct.block_offsets[k]);
        const auto beta = static_cast<Eigen::Index>(ct.block_sizes[k]);
        tuple.b_hat = ct.b.block(off, off, beta, beta);
        tuple.j_hats.assign(c, Eigen::VectorXd::Zero(beta));
        for (Eigen::Index u = 0; u < beta; ++u)
            tuple.j_hats[ct.coord_cluster[static_cast<std::size_t>(off + u)]](u) = 1.0;
        tuples.push_back(std::move(tuple));
    }
    return tuples;
}

nlohmann::json CanonicalReport::to_json() const {
    return {{"orthogonality", orthogonality},
            {"indicator_residual", indicator_residual},
            {"off_block_mass", off_block_mass},
            {"constant_column", constant_column},
            {"quotient_spectrum", quotient_spectrum},
            {"quotient_closure", quotient_closure},
            {"parallel_size", parallel_size},
            {"pass", pass}};
}

CanonicalReport verify_canonical(const CanonicalTransform& ct, const IndicatorSet& ind, double tol) {
    CanonicalReport rep;
    const Eigen::Index n = ct.t.rows();
    const std::size_t c = ind.cluster_count();
    rep.orthogonality = (ct.t.transpose() * ct.t - Eigen::MatrixXd::Identity(n, n)).norm();

    for (std::size_t k = 0; k < c; ++k) {
        const auto rows = ct.t.middleRows(static_cast<Eigen::Index>(ind.offsets[k]), static_cast<Eigen::Index>(ind.sizes[k]));
        Eigen::MatrixXd residual = rows.transpose() * rows;
        for (Eigen::Index u = 0; u < n; ++u)
            if (ct.coord_cluster[static_cast<std::size_t>(u)] == k) residual(u, u) -= 1.0;
        rep.indicator_residual = std::max(rep.indicator_residual, residual.norm());
    }

    const Eigen::MatrixXd b = ct.t.transpose() * ind.adjacency * ct.t;
    Eigen::MatrixXd off = b;
    for (std::size_t k = 0; k < ct.block_count(); ++k) {
        const auto o = static_cast<Eigen::Index>(ct.block_offsets[k]);
        const auto s = static_cast<Eigen::Index>(ct.block_sizes[k]);
        off.block(o, o, s, s).setZero();
    }
    rep.off_block_mass = off.norm();

    for (std::size_t k = 0; k < c; ++k) {
        const auto q = static_cast<Eigen::Index>(ct.quotient_coords.at(k));
        const double expected = 1.0 / std::sqrt(static_cast<double>(ind.sizes[k]));
        // either sign of the column is accepted
        double dev_pos = 0.0, dev_neg = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
            const double want = ind.coord_cluster[static_cast<std::size_t>(r)] == k ? expected : 0.0;
            dev_pos = std::max(dev_pos, std::fabs(ct.t(r, q) - want));
            dev_neg = std::max(dev_neg, std::fabs(ct.t(r, q) + want));
        }
        rep.constant_column = std::max(rep.constant_column, std::min(dev_pos, dev_neg));
    }

    std::vector<Eigen::Index> par, rest;
    for (std::size_t k = 0; k < ct.block_count(); ++k)
        for (std::size_t u = ct.block_offsets[k]; u < ct.block_offsets[k + 1]; ++u)
            (ct.block_class[k] == BlockClass::parallel ? par : rest).push_back(static_cast<Eigen::Index>(u));
    rep.parallel_size = par.size();

    const auto pn = static_cast<Eigen::Index>(par.size());
    Eigen::MatrixXd bp(pn, pn);
    for (Eigen::Index i = 0; i < pn; ++i)
        for (Eigen::Index j = 0; j < pn; ++j) bp(i, j) = b(par[static_cast<std::size_t>(i)], par[static_cast<std::size_t>(j)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bp, Eigen::EigenvaluesOnly);
    const auto q_spec = quotient_spectrum(ind);
    if (static_cast<std::size_t>(pn) != q_spec.size()) {
        rep.quotient_spectrum = std::numeric_limits<double>::infinity();
    } else {
        for (Eigen::Index i = 0; i < pn; ++i) {
            const auto& z = q_spec[static_cast<std::size_t>(i)];
            rep.quotient_spectrum =
                std::max(rep.quotient_spectrum, std::hypot(es.eigenvalues()(i) - z.real(), z.imag()));
        }
    }

    std::vector<bool> is_q(static_cast<std::size_t>(n), false);
    for (std::size_t q : ct.quotient_coords) is_q[q] = true;
    double closure = 0.0;
    for (Eigen::Index u = 0; u < n; ++u) {
        if (is_q[static_cast<std::size_t>(u)]) continue;
        for (std::size_t q : ct.quotient_coords) closure += b(u, static_cast<Eigen::Index>(q)) * b(u, static_cast<Eigen::Index>(q));
    }
    rep.quotient_closure = std::sqrt(closure);

    rep.pass = rep.orthogonality <= tol && rep.indicator_residual <= tol && rep.off_block_mass <= tol &&
               rep.constant_column <= tol && rep.quotient_spectrum <= tol && rep.quotient_closure <= tol;
    return rep;
}

ParameterCount parameter_count(const std::vector<std::size_t>& block_sizes, std::size_t cluster_count) {
    ParameterCount pc;
    for (std::size_t beta : block_sizes) pc.p2 += beta * (beta + 1) / 2;
    pc.p1 = (cluster_count + 1) * pc.p2;
    return pc;
}

}  // namespace csync
