#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "csync/errors.hpp"
#include "csync/partition.hpp"
#include "csync/pipeline.hpp"
#include "csync/stability.hpp"
#include "support.hpp"

using namespace csync;

namespace {

SbdResult run(const Network& net) { return run_canonical_sbd(net, coarsest_equitable_partition(net)); }

DynamicsSpec zero_dynamics(std::size_t m) {
    DynamicsSpec d;
    d.name = "zero";
    d.m = m;
    d.f = [m](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)); };
    d.h = d.f;
    return d;
}

Eigen::MatrixXd explicit_rhs_matrix(const SbdResult& r, const DynamicsSpec& dyn, const QuotientTrajectory& traj,
                                    double t) {
    const auto n = static_cast<Eigen::Index>(r.indicators.node_count() * dyn.m);
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        m.col(j) = full_variational_rhs(r.indicators, dyn, traj, t, e);
    }
    return m;
}

}  // namespace

TEST_CASE("dynamics presets and Jacobians") {
    const DynamicsSpec lin = make_dynamics("linear", {{"a", 0.3}, {"h", -2.0}});
    Eigen::VectorXd x(1);
    x << 1.7;
    CHECK(lin.f(x)(0) == doctest::Approx(0.51));
    CHECK(lin.jacobian_h(x)(0, 0) == -2.0);
    CHECK_THROWS_AS(make_dynamics("linear", {{"b", 1.0}}), ValidationError);
    CHECK_THROWS_AS(make_dynamics("duffing", {}), ValidationError);

    const DynamicsSpec lor = make_dynamics("lorenz", {});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd p(3);
        p << u(rng), u(rng), u(rng);
        const Eigen::MatrixXd analytic = lor.jacobian_f(p);
        const Eigen::MatrixXd fd = finite_difference_jacobian(lor.f, p);
        CHECK((analytic - fd).norm() <= 1e-4 * analytic.norm());
        CHECK((lor.jacobian_h(p) - finite_difference_jacobian(lor.h, p)).norm() <= 1e-4 * std::max(1.0, lor.jacobian_h(p).norm()));
    }
}

TEST_CASE("quotient integration") {
    SUBCASE("zero dynamics: constant trajectory") {
        const SbdResult r = run(testing::load_example("example4"));
        Eigen::MatrixXd x0(2, 2);
        x0 << 1, 2, 3, 4;
        const auto traj = quotient_integrate(r.indicators, zero_dynamics(2), x0, 1.0, 0.1);
        CHECK(traj.states.back() == x0);
    }
    SUBCASE("exponential growth on one cell") {
        std::vector<WeightedEdge> e;
        for (NodeIndex i = 0; i < 4; ++i)
            for (NodeIndex j = i + 1; j < 4; ++j) e.push_back({i, j, 1.0});
        const Network k4 = Network::from_edges(4, e);
        const SbdResult r = run(k4);
        const DynamicsSpec lin = linear_dynamics(0.0, 1.0);
        const auto traj = quotient_integrate(r.indicators, lin, Eigen::MatrixXd::Ones(1, 1), 1.0, 1e-3);
        CHECK(traj.states.back()(0, 0) == doctest::Approx(std::exp(3.0)).epsilon(1e-9));
        CHECK(traj.at(0.5)(0, 0) == doctest::Approx(std::exp(1.5)).epsilon(1e-6));
    }
    SUBCASE("equal row sums keep equal clusters equal") {
        // 6-ring with antipodal cells: Q = J - I, every row sums to 2
        std::vector<WeightedEdge> e;
        for (NodeIndex i = 0; i < 6; ++i) e.push_back({i, (i + 1) % 6, 1.0});
        const Network ring = Network::from_edges(6, e);
        const SbdResult r = run_canonical_sbd(ring, Partition({{0, 3}, {1, 4}, {2, 5}}, 6));
        const Eigen::VectorXd rows = r.indicators.quotient.rowwise().sum();
        REQUIRE((rows.array() == rows(0)).all());
        Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(3, 3, 1.0);
        x0.col(2).array() += 20.0;
        const auto traj = quotient_integrate(r.indicators, make_dynamics("lorenz", {}), x0, 2.0, 0.01);
        const Eigen::MatrixXd& s = traj.states.back();
        CHECK((s.row(0) - s.row(1)).norm() == 0.0);
        CHECK((s.row(0) - s.row(2)).norm() == 0.0);
    }
    SUBCASE("divergence is reported") {
        const SbdResult r = run(testing::load_example("example4"));
        const auto lin = linear_dynamics(400.0, 0.0);
        CHECK_THROWS_WITH_AS(quotient_integrate(r.indicators, lin, Eigen::MatrixXd::Ones(2, 1), 10.0, 0.01),
                             doctest::Contains("diverged at t ="), NumericalError);
    }
    SUBCASE("bad arguments") {
        const SbdResult r = run(testing::load_example("example4"));
        CHECK_THROWS_AS(quotient_integrate(r.indicators, linear_dynamics(0, 0), Eigen::MatrixXd::Ones(2, 1), 1.0, 0.0),
                        ValidationError);
        CHECK_THROWS_AS(quotient_integrate(r.indicators, linear_dynamics(0, 0), Eigen::MatrixXd::Ones(3, 1), 1.0, 0.1),
                        ValidationError);
    }
}

TEST_CASE("variational right-hand sides") {
    const SbdResult r = run(testing::load_example("example4"));
    const double a = 0.1, h = -0.5;
    const DynamicsSpec lin = linear_dynamics(a, h);
    const auto traj = quotient_integrate(r.indicators, lin, Eigen::MatrixXd::Zero(2, 1), 1.0, 0.1);

    const Eigen::MatrixXd full = explicit_rhs_matrix(r, lin, traj, 0.3);
    const Eigen::MatrixXd expected = a * Eigen::MatrixXd::Identity(4, 4) + h * r.indicators.adjacency;
    CHECK((full - expected).norm() < 1e-14);
    CHECK(full_variational_rhs(r.indicators, lin, traj, 0.3, Eigen::VectorXd::Zero(4)).norm() == 0.0);

    Eigen::MatrixXd reduced(4, 4);
    for (Eigen::Index j = 0; j < 4; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
        e(j) = 1.0;
        reduced.col(j) = transformed_variational_rhs(r.transform, lin, traj, 0.3, e);
    }
    CHECK((reduced - (a * Eigen::MatrixXd::Identity(4, 4) + h * r.transform.b)).norm() < 1e-14);
    const auto zero = zero_dynamics(1);
    CHECK(transformed_variational_rhs(r.transform, zero, traj, 0.3, Eigen::VectorXd::Ones(4)).norm() == 0.0);

    const DynamicsSpec lor = make_dynamics("lorenz", {});
    Eigen::MatrixXd x0(2, 3);
    x0 << 1, 2, 20, -1, 0, 25;
    const auto ltraj = quotient_integrate(r.indicators, lor, x0, 1.0, 0.01);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    Eigen::VectorXd dx(12);
    for (Eigen::Index i = 0; i < 12; ++i) dx(i) = normal(rng);
    const Eigen::VectorXd lhs = transformed_variational_rhs(r.transform, lor, ltraj, 0.55, to_transformed(r.transform, dx, 3));
    const Eigen::VectorXd rhs = to_transformed(r.transform, full_variational_rhs(r.indicators, lor, ltraj, 0.55, dx), 3);
    CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
}

TEST_CASE("single node: DF only") {
    const SbdResult r = run(Network(Eigen::MatrixXd::Zero(1, 1)));
    const DynamicsSpec lin = linear_dynamics(-0.7, 3.0);
    const auto traj = quotient_integrate(r.indicators, lin, Eigen::MatrixXd::Ones(1, 1), 1.0, 0.1);
    Eigen::VectorXd dx(1);
    dx << 2.0;
    CHECK(full_variational_rhs(r.indicators, lin, traj, 0.5, dx)(0) == doctest::Approx(-1.4));
}

TEST_CASE("Lyapunov exponents") {
    SUBCASE("linear preset matches a + h eig(B_k)") {
        for (const char* name : {"example4", "example8", "example11"}) {
            const SbdResult r = run(testing::load_example(name));
            const double a = 0.1, h = -0.5;
            const DynamicsSpec lin = linear_dynamics(a, h);
            const auto traj = quotient_integrate(r.indicators, lin,
                                                 Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r.indicators.cluster_count()), 1),
                                                 100.0, 0.01);
            for (std::size_t b = 0; b < r.transform.block_count(); ++b) {
                const auto ex = transverse_exponents(r.transform, lin, traj, b);
                const auto off = static_cast<Eigen::Index>(r.transform.block_offsets[b]);
                const auto beta = static_cast<Eigen::Index>(r.transform.block_sizes[b]);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.transform.b.block(off, off, beta, beta));
                REQUIRE(ex.exponents.size() == static_cast<std::size_t>(beta));
                std::vector<double> expected;
                for (Eigen::Index i = 0; i < beta; ++i) expected.push_back(a + h * es.eigenvalues()(i));
                std::sort(expected.rbegin(), expected.rend());
                for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::fabs(ex.exponents[i] - expected[i]) < 1e-4);
                CHECK(ex.includes_quotient == (r.transform.block_class[b] == BlockClass::parallel));
                CHECK(std::is_sorted(ex.exponents.rbegin(), ex.exponents.rend()));
            }
        }
    }
    SUBCASE("path transverse block has the single exponent a") {
        const SbdResult r = run(testing::path3());
        const DynamicsSpec lin = linear_dynamics(0.25, 0.8);
        const auto traj = quotient_integrate(r.indicators, lin, Eigen::MatrixXd::Zero(2, 1), 20.0, 0.01);
        const auto ex = transverse_exponents(r.transform, lin, traj, 1);
        REQUIRE(ex.exponents.size() == 1);
        CHECK(ex.exponents[0] == doctest::Approx(0.25).epsilon(1e-6));
        CHECK(ex.block_class == BlockClass::transverse);
    }
    SUBCASE("zero dynamics gives zero exponents") {
        const SbdResult r = run(testing::load_example("example6"));
        const auto zero = zero_dynamics(2);
        const auto traj = quotient_integrate(r.indicators, zero, Eigen::MatrixXd::Ones(3, 2), 5.0, 0.05);
        for (std::size_t b = 0; b < r.transform.block_count(); ++b)
            for (double e : transverse_exponents(r.transform, zero, traj, b).exponents) CHECK(std::fabs(e) < 1e-14);
    }
    SUBCASE("lorenz smoke test: finite exponents, transverse blocks of example4") {
        const SbdResult r = run(testing::load_example("example4"));
        const DynamicsSpec lor = make_dynamics("lorenz", {});
        Eigen::MatrixXd x0(2, 3);
        x0 << 0.1, 0.2, 25.0, -0.3, 0.1, 24.0;
        const auto traj = quotient_integrate(r.indicators, lor, x0, 20.0, 0.01);
        const auto ex = transverse_exponents(r.transform, lor, traj, 1);
        CHECK(ex.exponents.size() == 6);
        for (double e : ex.exponents) CHECK(std::isfinite(e));
    }
    SUBCASE("bad options") {
        const SbdResult r = run(testing::path3());
        const DynamicsSpec lin = linear_dynamics(0.25, 0.8);
        const auto traj = quotient_integrate(r.indicators, lin, Eigen::MatrixXd::Zero(2, 1), 1.0, 0.1);
        CHECK_THROWS_AS(transverse_exponents(r.transform, lin, traj, 5), ValidationError);
        CHECK_THROWS_AS(transverse_exponents(r.transform, lin, traj, 0, {0, 0.2}), ValidationError);
        CHECK_THROWS_AS(transverse_exponents(r.transform, lin, traj, 0, {10, 1.0}), ValidationError);
    }
}

TEST_CASE("integrate_rk4 on a scalar linear equation") {
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    const auto ys = integrate_rk4([](double, const Eigen::VectorXd& y) { return Eigen::VectorXd(-2.0 * y); }, y0, 0.01, 100);
    CHECK(ys.size() == 101);
    CHECK(ys.back()(0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
}

TEST_CASE("operator decoupling is not vacuous") {
    // A non-canonical orthogonal basis couples the blocks of the variational operator.
    const SbdResult r = run(testing::load_example("example4"));
    CanonicalTransform mixed = r.transform;
    const double c = std::cos(0.4), s = std::sin(0.4);
    const Eigen::VectorXd u = mixed.t.col(0), v = mixed.t.col(2);
    mixed.t.col(0) = c * u - s * v;
    mixed.t.col(2) = s * u + c * v;
    mixed.b = mixed.t.transpose() * r.indicators.adjacency * mixed.t;
    const Eigen::MatrixXd off = mixed.b.topRightCorner(2, 2);
    CHECK(off.norm() > 0.1);
    CHECK(r.transform.b.topRightCorner(2, 2).norm() < 1e-12);
}
