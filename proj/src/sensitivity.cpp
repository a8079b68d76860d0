#include "csync/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "csync/errors.hpp"

namespace csync {

namespace {

/// dB_rc for a unit change of edge (pu, pv), rows given in cluster-contiguous positions.
double derivative(const Eigen::MatrixXd& t, Eigen::Index pu, Eigen::Index pv, Eigen::Index r, Eigen::Index c) {
    return t(pu, r) * t(pv, c) + t(pv, r) * t(pu, c);
}

std::size_t count_in_block(const Eigen::MatrixXd& t, const CanonicalTransform& ct, Eigen::Index pu, Eigen::Index pv,
                           double tol) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < ct.block_count(); ++k)
        for (std::size_t r = ct.block_offsets[k]; r < ct.block_offsets[k + 1]; ++r)
            for (std::size_t c = ct.block_offsets[k]; c < ct.block_offsets[k + 1]; ++c)
                if (std::fabs(derivative(t, pu, pv, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) > tol)
                    ++count;
    return count;
}

/// T with every block rotated by a Haar-random orthogonal matrix.
Eigen::MatrixXd rotate_blocks(const CanonicalTransform& ct, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd out = ct.t;
    for (std::size_t k = 0; k < ct.block_count(); ++k) {
        const auto beta = static_cast<Eigen::Index>(ct.block_sizes[k]);
        const auto off = static_cast<Eigen::Index>(ct.block_offsets[k]);
        Eigen::MatrixXd g(beta, beta);
        for (Eigen::Index j = 0; j < beta; ++j)
            for (Eigen::Index i = 0; i < beta; ++i) g(i, j) = normal(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(beta, beta);
        out.middleCols(off, beta) = ct.t.middleCols(off, beta) * q;
    }
    return out;
}

}  // namespace

SensitivityReport sensitivity(const Network& net, const Partition& part, const CanonicalTransform& ct,
                              const std::vector<EdgeParam>& params, const SensitivityOptions& options) {
    if (!(options.sens_tol > 0.0)) throw ValidationError("sens_tol must be positive");
    if (part.node_count() != net.size() || static_cast<std::size_t>(ct.t.rows()) != net.size())
        throw ValidationError("network, partition and transform sizes differ");
    std::set<std::string> names;
    for (const auto& p : params) {
        if (!names.insert(p.name).second) throw ValidationError("duplicate parameter name '" + p.name + "'");
        if (p.u >= net.size() || p.v >= net.size() || p.u == p.v)
            throw ValidationError("parameter '" + p.name + "' does not name a valid node pair");
        if (net.weight(p.u, p.v) == 0.0 && !options.allow_new_edges)
            throw ValidationError("parameter '" + p.name + "' refers to an edge outside the network");
    }

    const Eigen::MatrixXd rotated = rotate_blocks(ct, options.seed);
    SensitivityReport rep;
    const auto n = static_cast<std::size_t>(ct.t.cols());
    for (const auto& p : params) {
        ParamSensitivity ps;
        ps.name = p.name;
        ps.u = p.u;
        ps.v = p.v;
        ps.added = net.weight(p.u, p.v) == 0.0;
        const auto pu = static_cast<Eigen::Index>(part.position()[p.u]);
        const auto pv = static_cast<Eigen::Index>(part.position()[p.v]);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t br = ct.block_of(r);
            for (std::size_t c = 0; c < n; ++c) {
                const double d = derivative(ct.t, pu, pv, static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                if (std::fabs(d) <= options.sens_tol) continue;
                const std::size_t bc = ct.block_of(c);
                if (br == bc) {
                    ps.entries.push_back({static_cast<long>(br), r - ct.block_offsets[br], c - ct.block_offsets[br], d});
                    ++ps.in_block_count;
                } else {
                    ps.entries.push_back({-1, r, c, d});
                }
            }
        }
        ps.rotated_in_block_count = count_in_block(rotated, ct, pu, pv, options.sens_tol);

        const double nominal = p.value;
        for (double sign : {-1.0, 1.0}) {
            const Network perturbed = net.with_weight(p.u, p.v, nominal + sign * options.guard_delta);
            if (!check_equitable(perturbed, part)) ps.equitable_at_perturbation = false;
        }
        if (!ps.equitable_at_perturbation)
            rep.warnings.push_back("changing " + p.name + " breaks equitability of the nominal partition");
        rep.params.push_back(std::move(ps));
    }

    const std::size_t np = rep.params.size();
    rep.overlaps.assign(np, std::vector<std::size_t>(np, 0));
    for (std::size_t a = 0; a < np; ++a) {
        std::set<std::tuple<long, std::size_t, std::size_t>> sa;
        for (const auto& e : rep.params[a].entries)
            if (e.block >= 0) sa.emplace(e.block, e.row, e.col);
        for (std::size_t b = 0; b < np; ++b)
            for (const auto& e : rep.params[b].entries)
                if (e.block >= 0 && sa.count({e.block, e.row, e.col})) ++rep.overlaps[a][b];
    }
    return rep;
}

nlohmann::json SensitivityReport::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t a = 0; a < params.size(); ++a) {
        const auto& p = params[a];
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : p.entries) entries.push_back({e.block, e.row, e.col, e.value});
        nlohmann::json overlaps = nlohmann::json::object();
        for (std::size_t b = 0; b < params.size(); ++b)
            if (b != a) overlaps[params[b].name] = this->overlaps[a][b];
        out.push_back({{"param", p.name},
                       {"edge", {p.u, p.v}},
                       {"added", p.added},
                       {"entries", std::move(entries)},
                       {"in_block_count", p.in_block_count},
                       {"rotated_in_block_count", p.rotated_in_block_count},
                       {"equitable_at_perturbation", p.equitable_at_perturbation},
                       {"overlaps", std::move(overlaps)}});
    }
    return {{"params", std::move(out)}, {"warnings", warnings}};
}

EdgeParam parse_edge_param(const std::string& text, const Network& net) {
    const auto colon = text.find(':');
    const auto comma = text.find(',', colon == std::string::npos ? 0 : colon);
    const auto eq = text.find('=', comma == std::string::npos ? 0 : comma);
    if (colon == std::string::npos || comma == std::string::npos || eq == std::string::npos || colon == 0)
        throw ValidationError("parameter '" + text + "' is not of the form name:i,j=w");
    EdgeParam p;
    p.name = text.substr(0, colon);
    p.u = node_by_label(net, text.substr(colon + 1, comma - colon - 1));
    p.v = node_by_label(net, text.substr(comma + 1, eq - comma - 1));
    const std::string w = text.substr(eq + 1);
    std::size_t used = 0;
    try {
        p.value = std::stod(w, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != w.size() || !std::isfinite(p.value))
        throw ValidationError("parameter '" + text + "' has an invalid weight");
    return p;
}

}  // namespace csync
