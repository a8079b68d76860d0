#include "csync/baseline.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "csync/errors.hpp"

namespace csync {

namespace {

using Sparse = Eigen::SparseMatrix<double>;

class CommutationOperator {
public:
    CommutationOperator(const Network& net, const Partition& part) : n_(static_cast<Eigen::Index>(net.size())) {
        std::vector<Eigen::Triplet<double>> trip;
        for (const auto& e : net.edges()) {
            trip.emplace_back(static_cast<int>(e.u), static_cast<int>(e.v), e.weight);
            trip.emplace_back(static_cast<int>(e.v), static_cast<int>(e.u), e.weight);
        }
        a_.resize(n_, n_);
        a_.setFromTriplets(trip.begin(), trip.end());
        a_.makeCompressed();
        members_ = part.cells();
        in_set_.assign(net.size(), 0);
    }

    const Sparse& a() const { return a_; }

    /// out = L^T L x. The E_k terms use only the sparsity of E_k:
    /// ([[X, E], E])_ij = X_ij (e_j - e_i)^2.
    void apply(const Eigen::MatrixXd& x, Eigen::MatrixXd& out) {
        const Eigen::MatrixXd c = x * a_ - a_ * x;
        out.noalias() = c * a_;
        out.noalias() -= a_ * c;
        for (const auto& cell : members_) {
            for (NodeIndex i : cell) in_set_[i] = 1;
            for (NodeIndex i : cell) {
                const auto ii = static_cast<Eigen::Index>(i);
                for (Eigen::Index j = 0; j < n_; ++j) {
                    if (in_set_[static_cast<std::size_t>(j)]) continue;
                    out(ii, j) += x(ii, j);
                    out(j, ii) += x(j, ii);
                }
            }
            for (NodeIndex i : cell) in_set_[i] = 0;
        }
    }

    /// ||L x||_F.
    double norm(const Eigen::MatrixXd& x) {
        double sq = (x * a_ - a_ * x).squaredNorm();
        for (const auto& cell : members_) {
            for (NodeIndex i : cell) in_set_[i] = 1;
            for (NodeIndex i : cell) {
                const auto ii = static_cast<Eigen::Index>(i);
                for (Eigen::Index j = 0; j < n_; ++j) {
                    if (in_set_[static_cast<std::size_t>(j)]) continue;
                    sq += x(ii, j) * x(ii, j) + x(j, ii) * x(j, ii);
                }
            }
            for (NodeIndex i : cell) in_set_[i] = 0;
        }
        return std::sqrt(sq);
    }

    /// Diagonal of L^T L in the entry basis.
    Eigen::MatrixXd diagonal() {
        const Eigen::VectorXd a2 = Eigen::MatrixXd(a_).cwiseAbs2().rowwise().sum();
        Eigen::MatrixXd d(n_, n_);
        for (Eigen::Index j = 0; j < n_; ++j)
            for (Eigen::Index i = 0; i < n_; ++i) d(i, j) = a2(i) + a2(j);
        Eigen::MatrixXd e_part = Eigen::MatrixXd::Zero(n_, n_);
        for (const auto& cell : members_) {
            for (NodeIndex i : cell) in_set_[i] = 1;
            for (NodeIndex i : cell) {
                const auto ii = static_cast<Eigen::Index>(i);
                for (Eigen::Index j = 0; j < n_; ++j) {
                    if (in_set_[static_cast<std::size_t>(j)]) continue;
                    e_part(ii, j) += 1.0;
                    e_part(j, ii) += 1.0;
                }
            }
            for (NodeIndex i : cell) in_set_[i] = 0;
        }
        d += e_part;
        return d.unaryExpr([](double v) { return v > 0.0 ? v : 1.0; });
    }

private:
    Eigen::Index n_;
    Sparse a_;
    std::vector<std::vector<NodeIndex>> members_;
    std::vector<char> in_set_;
};

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

void unite_support(const Eigen::MatrixXd& m, double eps, DisjointSets& sets) {
    for (Eigen::Index v = 0; v < m.cols(); ++v)
        for (Eigen::Index u = v + 1; u < m.rows(); ++u)
            if (std::fabs(m(u, v)) > eps) sets.unite(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
}

}  // namespace

BaselineResult baseline_sbd(const Network& net, const Partition& part, const BaselineOptions& options) {
    if (part.node_count() != net.size()) throw ValidationError("partition does not match the network size");
    if (!(options.eps_zero_rel > 0.0)) throw ValidationError("eps_zero must be positive");
    const auto n = static_cast<Eigen::Index>(net.size());
    CommutationOperator op(net, part);
    const double a_norm = std::max(net.adjacency().norm(), 1.0);

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) x(i, j) = x(j, i) = normal(rng);

    const Eigen::MatrixXd inv_diag = op.diagonal().cwiseInverse();
    Eigen::MatrixXd r(n, n), q(n, n);
    op.apply(x, q);
    r = -q;
    Eigen::MatrixXd z = r.cwiseProduct(inv_diag);
    Eigen::MatrixXd p = z;
    double rz = (r.array() * z.array()).sum();

    BaselineResult res;
    res.unknowns = static_cast<std::size_t>(n * n);
    auto converged = [&]() {
        res.residual = op.norm(x) / (a_norm * x.norm());
        return res.residual <= options.residual_tol;
    };
    constexpr std::size_t kCheckEvery = 25;
    bool done = converged();
    while (!done && res.iterations < options.max_iterations) {
        op.apply(p, q);
        const double pq = (p.array() * q.array()).sum();
        if (!(pq > 0.0)) break;
        const double alpha = rz / pq;
        x += alpha * p;
        r -= alpha * q;
        ++res.iterations;
        if (res.iterations % kCheckEvery == 0 && converged()) {
            done = true;
            break;
        }
        z = r.cwiseProduct(inv_diag);
        const double rz_next = (r.array() * z.array()).sum();
        if (rz_next == 0.0) break;
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    if (!done) converged();

    const Eigen::MatrixXd sym = 0.5 * (x + x.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of the baseline commutant element failed");
    res.t = es.eigenvectors();

    DisjointSets sets(static_cast<std::size_t>(n));
    const Eigen::MatrixXd at = op.a() * res.t;
    unite_support(res.t.transpose() * at, options.eps_zero_rel * net.adjacency().norm(), sets);
    for (const auto& cell : part.cells()) {
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(cell.size()), n);
        for (std::size_t k = 0; k < cell.size(); ++k)
            rows.row(static_cast<Eigen::Index>(k)) = res.t.row(static_cast<Eigen::Index>(cell[k]));
        unite_support(rows.transpose() * rows, options.eps_zero_rel * std::sqrt(static_cast<double>(cell.size())), sets);
    }

    std::vector<std::size_t> root_block(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    std::vector<std::size_t> counts;
    res.coord_block.resize(static_cast<std::size_t>(n));
    for (std::size_t u = 0; u < static_cast<std::size_t>(n); ++u) {
        const std::size_t root = sets.find(u);
        if (root_block[root] == static_cast<std::size_t>(n)) {
            root_block[root] = counts.size();
            counts.push_back(0);
        }
        res.coord_block[u] = root_block[root];
        ++counts[root_block[root]];
    }
    res.block_sizes = counts;
    std::sort(res.block_sizes.begin(), res.block_sizes.end(), std::greater<>());
    return res;
}

}  // namespace csync
