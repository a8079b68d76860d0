#include <doctest.h>

#include <set>

#include "csync/errors.hpp"
#include "csync/pipeline.hpp"
#include "csync/sensitivity.hpp"
#include "support.hpp"

using namespace csync;

namespace {

SbdResult run(const Network& net) { return run_canonical_sbd(net, coarsest_equitable_partition(net)); }

}  // namespace

TEST_CASE("path edge sensitivity is confined to coordinates touching its endpoints") {
    const Network net = testing::path3();
    const SbdResult r = run(net);
    const auto rep = sensitivity(net, r.partition, r.transform, {parse_edge_param("q:1,2=1", net)});
    REQUIRE(rep.params.size() == 1);
    const Eigen::MatrixXd t = transform_in_node_order(r.transform, r.partition);
    for (const auto& e : rep.params[0].entries) {
        const std::size_t row = e.block < 0 ? e.row : r.transform.block_offsets[static_cast<std::size_t>(e.block)] + e.row;
        const std::size_t col = e.block < 0 ? e.col : r.transform.block_offsets[static_cast<std::size_t>(e.block)] + e.col;
        const auto touches = [&](std::size_t c) {
            return t(0, static_cast<Eigen::Index>(c)) != 0.0 || t(1, static_cast<Eigen::Index>(c)) != 0.0;
        };
        CHECK(touches(row));
        CHECK(touches(col));
    }
    // explicit 3x3 oracle: dB = T^T E T with E the unit edge matrix on (1,2)
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(3, 3);
    e(0, 1) = e(1, 0) = 1.0;
    const Eigen::MatrixXd db = t.transpose() * e * t;
    std::size_t nonzero = 0;
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            if (std::fabs(db(i, j)) > 1e-10) ++nonzero;
    CHECK(rep.params[0].entries.size() == nonzero);
    CHECK(rep.params[0].equitable_at_perturbation == false);
    CHECK(rep.warnings.size() == 1);
}

TEST_CASE("report is symmetric in row and column") {
    const Network net = testing::load_example("example11");
    const SbdResult r = run(net);
    const auto rep = sensitivity(net, r.partition, r.transform,
                                 {parse_edge_param("q1:1,8=1", net), parse_edge_param("q2:5,10=1", net),
                                  parse_edge_param("q3:3,4=1", net)});
    for (const auto& p : rep.params) {
        std::set<std::tuple<long, std::size_t, std::size_t>> s;
        for (const auto& e : p.entries) s.emplace(e.block, e.row, e.col);
        for (const auto& e : p.entries) CHECK(s.count({e.block, e.col, e.row}) == 1);
    }
    CHECK(rep.overlaps[0][1] == rep.overlaps[1][0]);
    CHECK(rep.overlaps[0][0] == rep.params[0].in_block_count);
}

TEST_CASE("edge inside one block only affects that block") {
    const Network net = testing::load_example("example11");
    const SbdResult r = run(net);
    // nodes 3 and 4 form one cell; their edge lives in the parallel and the 3,4-antisymmetric coordinates
    const auto rep = sensitivity(net, r.partition, r.transform, {parse_edge_param("q:3,4=1", net)});
    std::set<long> blocks;
    for (const auto& e : rep.params[0].entries) blocks.insert(e.block);
    CHECK(blocks.count(-1) == 0);
}

TEST_CASE("fewer affected entries than under a rotated basis") {
    const Network net = testing::load_example("example11");
    const SbdResult r = run(net);
    const auto rep = sensitivity(net, r.partition, r.transform,
                                 {parse_edge_param("q1:1,8=1", net), parse_edge_param("q2:5,10=1", net)});
    for (const auto& p : rep.params) CHECK(p.in_block_count < p.rotated_in_block_count);
}

TEST_CASE("sign flips of T columns leave the affected entry set unchanged") {
    const Network net = testing::load_example("example11");
    const SbdResult r = run(net);
    CanonicalTransform flipped = r.transform;
    for (Eigen::Index c = 0; c < flipped.t.cols(); c += 2) flipped.t.col(c) *= -1.0;
    const std::vector<EdgeParam> params{parse_edge_param("q1:1,8=1", net), parse_edge_param("q2:5,10=1", net)};
    const auto a = sensitivity(net, r.partition, r.transform, params);
    const auto b = sensitivity(net, r.partition, flipped, params);
    for (std::size_t p = 0; p < params.size(); ++p) {
        REQUIRE(a.params[p].entries.size() == b.params[p].entries.size());
        for (std::size_t i = 0; i < a.params[p].entries.size(); ++i) {
            CHECK(a.params[p].entries[i].block == b.params[p].entries[i].block);
            CHECK(a.params[p].entries[i].row == b.params[p].entries[i].row);
            CHECK(a.params[p].entries[i].col == b.params[p].entries[i].col);
            CHECK(std::fabs(a.params[p].entries[i].value) == doctest::Approx(std::fabs(b.params[p].entries[i].value)));
        }
    }
    CHECK(a.overlaps == b.overlaps);
}

TEST_CASE("parameter validation") {
    const Network net = testing::load_example("example11");
    const SbdResult r = run(net);
    CHECK_THROWS_AS(parse_edge_param("q1 1,8=1", net), ValidationError);
    CHECK_THROWS_AS(parse_edge_param("q1:1,99=1", net), ValidationError);
    CHECK_THROWS_AS(parse_edge_param("q1:1,8=abc", net), ValidationError);
    const auto absent = parse_edge_param("q:1,3=1", net);
    CHECK_THROWS_AS(sensitivity(net, r.partition, r.transform, {absent}), ValidationError);
    SensitivityOptions allow;
    allow.allow_new_edges = true;
    const auto rep = sensitivity(net, r.partition, r.transform, {absent}, allow);
    CHECK(rep.params[0].added);
    const auto q = parse_edge_param("q:1,8=1", net);
    CHECK_THROWS_AS(sensitivity(net, r.partition, r.transform, {q, q}), ValidationError);
    SensitivityOptions bad;
    bad.sens_tol = 0.0;
    CHECK_THROWS_AS(sensitivity(net, r.partition, r.transform, {q}, bad), ValidationError);
}

TEST_CASE("JSON shape") {
    const Network net = testing::load_example("example11");
    const SbdResult r = run(net);
    const auto j = sensitivity(net, r.partition, r.transform,
                               {parse_edge_param("q1:1,8=1", net), parse_edge_param("q2:5,10=1", net)})
                       .to_json();
    REQUIRE(j["params"].size() == 2);
    CHECK(j["params"][0]["param"] == "q1");
    CHECK(j["params"][0]["entries"][0].size() == 4);
    CHECK(j["params"][0]["overlaps"].contains("q2"));
}
