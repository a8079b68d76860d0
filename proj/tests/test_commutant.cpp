#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "csync/commutant.hpp"
#include "csync/errors.hpp"
#include "csync/generator.hpp"
#include "support.hpp"

using namespace csync;
using Cells = std::vector<std::vector<NodeIndex>>;

namespace {

IndicatorSet indicators(const Network& net) { return build_indicators(net, coarsest_equitable_partition(net)); }

Network complete(std::size_t n) {
    std::vector<WeightedEdge> e;
    for (NodeIndex i = 0; i < n; ++i)
        for (NodeIndex j = i + 1; j < n; ++j) e.push_back({i, j, 1.0});
    return Network::from_edges(n, e);
}

}  // namespace

TEST_CASE("problem dimensions") {
    const auto fig1 = assemble_problem(indicators(testing::load_example("example4")));
    CHECK(fig1.n_cols == 8);
    CHECK(fig1.n_rows == 16);
    const auto k4 = assemble_problem(indicators(complete(4)));
    CHECK(k4.n_cols == 16);
    const auto path = assemble_problem(indicators(testing::path3()));
    CHECK(path.n_cols == 5);
    CHECK(path.n_rows == 9);
}

TEST_CASE("Gram assembly equals the explicit stacked system") {
    std::mt19937_64 rng(4);
    int checked = 0;
    while (checked < 25) {
        auto pn = testing::random_planted(rng, 50);
        if (!pn) continue;
        ++checked;
        const IndicatorSet ind = build_indicators(pn->network, pn->partition);
        const auto prob = assemble_problem(ind);
        const Eigen::MatrixXd s = assemble_explicit_s(ind);
        CHECK(static_cast<std::size_t>(s.rows()) == prob.n_rows);
        const Eigen::MatrixXd gram = s.transpose() * s;
        CHECK((gram - prob.sts).norm() <= 1e-12 * std::max(1.0, gram.norm()));
        CHECK((prob.sts - prob.sts.transpose()).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prob.sts);
        CHECK(es.eigenvalues().minCoeff() > -1e-9 * es.eigenvalues().maxCoeff());
        CHECK(prob.n_cols <= pn->network.size() * pn->network.size());
        if (pn->partition.cluster_count() > 1) CHECK(prob.n_cols < pn->network.size() * pn->network.size());
    }
}

TEST_CASE("nullspace dimensions") {
    // cells {0,2},{1}: P_1 = [[a,b],[b,a]] and the middle row forces p_2 = a + b
    const auto path = nullspace(assemble_problem(indicators(testing::path3())));
    CHECK(path.dim() == 2);
    CHECK(path.dim() == testing::dense_commutant_dim(testing::path3(), {{0, 2}, {1}}));
    // connected network, singleton cells: only multiples of the identity
    const Network p = testing::path3();
    const auto singles = nullspace(assemble_problem(build_indicators(p, Partition(Cells{{0}, {1}, {2}}, 3))));
    CHECK(singles.dim() == 1);
    const auto basis = nullspace(assemble_problem(indicators(testing::load_example("example4"))));
    CHECK(basis.dim() == 2);
    CHECK((basis.vectors.transpose() * basis.vectors - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
    CHECK(basis.spectrum_tail().size() == 4);
    CHECK_THROWS_AS(nullspace(assemble_problem(indicators(p)), 0.0), ValidationError);
}

TEST_CASE("shift-invert vectors span the dense nullspace") {
    std::mt19937_64 rng(21);
    int checked = 0;
    while (checked < 12) {
        auto pn = testing::random_planted(rng, 40);
        if (!pn) continue;
        ++checked;
        const auto prob = assemble_problem(build_indicators(pn->network, pn->partition));
        const auto dense = nullspace(prob, 1e-9, NullspaceVectors::dense);
        const auto iter = nullspace(prob, 1e-9, NullspaceVectors::shift_invert);
        CHECK_FALSE(dense.iterative);
        CHECK(iter.iterative);
        REQUIRE(iter.dim() == dense.dim());
        CHECK(iter.sts_spectrum == dense.sts_spectrum);
        CHECK(testing::subspace_distance(iter.vectors, dense.vectors) < 1e-10);
        const auto d = static_cast<Eigen::Index>(iter.dim());
        CHECK((iter.vectors.transpose() * iter.vectors - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-12);
    }
    // large enough for the automatic switch
    const auto pn = generate_planted({{30, 30}, {{2, 1}, {1, 4}}, 5});
    const auto prob = assemble_problem(build_indicators(pn.network, pn.partition));
    REQUIRE(prob.n_cols > kDenseVectorLimit);
    const auto automatic = nullspace(prob);
    CHECK(automatic.iterative);
    CHECK(testing::subspace_distance(automatic.vectors, nullspace(prob, 1e-9, NullspaceVectors::dense).vectors) < 1e-10);
}

TEST_CASE("one cell: the commutant is the commutant of A") {
    const Network c5 = Network::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
    const IndicatorSet ind = indicators(c5);
    REQUIRE(ind.cluster_count() == 1);
    const auto basis = nullspace(assemble_problem(ind));
    // C5 has eigenvalues 2, 2cos(2pi/5) x2, 2cos(4pi/5) x2: 1 + 4 + 4
    CHECK(basis.dim() == 9);
    for (std::size_t j = 0; j < basis.dim(); ++j) {
        const Eigen::MatrixXd p = basis.element(j)[0];
        CHECK((p * ind.adjacency - ind.adjacency * p).norm() < 1e-9 * ind.adjacency.norm());
    }
}

TEST_CASE("basis elements commute with A") {
    for (const char* name : {"example6", "example8", "example10", "example11"}) {
        const IndicatorSet ind = indicators(testing::load_example(name));
        const auto basis = nullspace(assemble_problem(ind));
        for (std::size_t j = 0; j < basis.dim(); ++j) {
            CommutantElement el;
            el.blocks = basis.element(j);
            CHECK(commutation_residual(el, ind.adjacency) <= 1e-9 * ind.adjacency.norm());
        }
    }
}

TEST_CASE("nullspace dimension is invariant under relabeling within cells") {
    std::mt19937_64 rng(8);
    for (const char* name : {"example8", "example10", "example11"}) {
        const Network net = testing::load_example(name);
        const Partition part = coarsest_equitable_partition(net);
        std::vector<NodeIndex> perm(net.size());
        std::iota(perm.begin(), perm.end(), 0);
        for (const auto& cell : part.cells()) {
            auto shuffled = cell;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            for (std::size_t i = 0; i < cell.size(); ++i) perm[cell[i]] = shuffled[i];
        }
        std::vector<WeightedEdge> edges;
        for (const auto& e : net.edges()) edges.push_back({perm[e.u], perm[e.v], e.weight});
        const Network relabeled = Network::from_edges(net.size(), edges);
        const Partition rpart = coarsest_equitable_partition(relabeled);
        CHECK(rpart.cells() == part.cells());
        CHECK(nullspace(assemble_problem(build_indicators(relabeled, rpart))).dim() ==
              nullspace(assemble_problem(build_indicators(net, part))).dim());
    }
}

TEST_CASE("sample_element") {
    SUBCASE("identity-only commutant is fully degenerate") {
        const Network p = testing::path3();
        const auto basis = nullspace(assemble_problem(build_indicators(p, Partition(Cells{{0}, {1}, {2}}, 3))));
        const auto el = sample_element(basis, 0);
        CHECK(el.fully_degenerate);
        const Eigen::MatrixXd d = el.dense();
        CHECK((d - d(0, 0) * Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
    }
    SUBCASE("path: P_1 has the symmetric and antisymmetric eigenvectors") {
        const auto basis = nullspace(assemble_problem(indicators(testing::path3())));
        const auto el = sample_element(basis, 0);
        const Eigen::MatrixXd& p1 = el.blocks[0];
        CHECK(p1 == p1.transpose());
        Eigen::Vector2d plus(1, 1), minus(1, -1);
        const Eigen::Vector2d a = p1 * plus, b = p1 * minus;
        CHECK(std::fabs(a(0) - a(1)) < 1e-12);
        CHECK(std::fabs(b(0) + b(1)) < 1e-12);
    }
    SUBCASE("deterministic and in the commutant") {
        const IndicatorSet ind = indicators(testing::load_example("example10"));
        const auto basis = nullspace(assemble_problem(ind));
        const auto a = sample_element(basis, 42);
        const auto b = sample_element(basis, 42);
        REQUIRE(a.blocks.size() == b.blocks.size());
        for (std::size_t i = 0; i < a.blocks.size(); ++i) CHECK(a.blocks[i] == b.blocks[i]);
        for (const auto& blk : a.blocks) CHECK(blk == blk.transpose());
        CHECK(commutation_residual(a, ind.adjacency) <= 1e-8 * ind.adjacency.norm() * a.dense().norm());
    }
    SUBCASE("constant vector is an eigenvector of every block") {
        std::mt19937_64 rng(9);
        int checked = 0;
        while (checked < 30) {
            auto pn = testing::random_planted(rng, 40);
            if (!pn) continue;
            ++checked;
            const IndicatorSet ind = build_indicators(pn->network, pn->partition);
            const auto el = sample_element(nullspace(assemble_problem(ind)), static_cast<std::uint64_t>(checked));
            for (const auto& blk : el.blocks) {
                const Eigen::VectorXd one = Eigen::VectorXd::Ones(blk.rows());
                const Eigen::VectorXd img = blk * one;
                const double lambda = img.mean();
                CHECK((img - lambda * one).norm() <= 1e-12 * std::max(1.0, blk.norm()));
            }
            CHECK(commutation_residual(el, ind.adjacency) <= 1e-8 * std::max(1.0, ind.adjacency.norm()) * el.dense().norm());
        }
    }
    SUBCASE("empty basis") {
        CommutantBasis empty;
        CHECK_THROWS_AS(sample_element(empty, 0), ValidationError);
    }
}
