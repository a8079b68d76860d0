#include "csync/generator.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "csync/errors.hpp"

namespace csync {

namespace {

using Rng = std::mt19937_64;
using EdgeSet = std::set<std::pair<NodeIndex, NodeIndex>>;

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool has_edge(const EdgeSet& edges, NodeIndex a, NodeIndex b) { return edges.count(std::minmax(a, b)) > 0; }

/// Random d-regular simple graph on `nodes` by greedy stub matching.
bool place_regular(const std::vector<NodeIndex>& nodes, std::size_t d, Rng& rng, EdgeSet& out) {
    const std::size_t n = nodes.size();
    if (d == 0) return true;
    if (d == n - 1) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) out.insert(std::minmax(nodes[i], nodes[j]));
        return true;
    }
    std::vector<NodeIndex> stubs;
    for (NodeIndex v : nodes) stubs.insert(stubs.end(), d, v);
    EdgeSet local;
    std::vector<std::size_t> candidates;
    while (!stubs.empty()) {
        const std::size_t i = uniform_index(rng, stubs.size());
        const NodeIndex a = stubs[i];
        stubs[i] = stubs.back();
        stubs.pop_back();
        candidates.clear();
        for (std::size_t j = 0; j < stubs.size(); ++j)
            if (stubs[j] != a && !has_edge(local, a, stubs[j])) candidates.push_back(j);
        if (candidates.empty()) return false;
        const std::size_t j = candidates[uniform_index(rng, candidates.size())];
        local.insert(std::minmax(a, stubs[j]));
        stubs[j] = stubs.back();
        stubs.pop_back();
    }
    out.insert(local.begin(), local.end());
    return true;
}

/// Random biregular bipartite graph: left nodes get d_left, right nodes d_right.
bool place_bipartite(const std::vector<NodeIndex>& left, const std::vector<NodeIndex>& right, std::size_t d_left,
                     std::size_t d_right, Rng& rng, EdgeSet& out) {
    if (d_left == 0) return true;
    if (d_left == right.size()) {
        for (NodeIndex a : left)
            for (NodeIndex b : right) out.insert(std::minmax(a, b));
        return true;
    }
    std::vector<NodeIndex> left_stubs, right_stubs;
    for (NodeIndex v : left) left_stubs.insert(left_stubs.end(), d_left, v);
    for (NodeIndex v : right) right_stubs.insert(right_stubs.end(), d_right, v);
    std::shuffle(left_stubs.begin(), left_stubs.end(), rng);
    EdgeSet local;
    std::vector<std::size_t> candidates;
    for (NodeIndex a : left_stubs) {
        candidates.clear();
        for (std::size_t j = 0; j < right_stubs.size(); ++j)
            if (!has_edge(local, a, right_stubs[j])) candidates.push_back(j);
        if (candidates.empty()) return false;
        const std::size_t j = candidates[uniform_index(rng, candidates.size())];
        local.insert(std::minmax(a, right_stubs[j]));
        right_stubs[j] = right_stubs.back();
        right_stubs.pop_back();
    }
    out.insert(local.begin(), local.end());
    return true;
}

}  // namespace

void check_planted_feasible(const PlantedSpec& spec) {
    const std::size_t c = spec.sizes.size();
    if (c == 0) throw ValidationError("planted spec has no cells");
    if (spec.degrees.size() != c) throw ValidationError("quotient_degrees must be C x C");
    for (std::size_t k = 0; k < c; ++k) {
        if (spec.sizes[k] == 0) throw ValidationError("cell " + std::to_string(k + 1) + " is empty");
        if (spec.degrees[k].size() != c) throw ValidationError("quotient_degrees must be C x C");
    }
    for (std::size_t k = 0; k < c; ++k) {
        const std::size_t nk = spec.sizes[k];
        const std::size_t dkk = spec.degrees[k][k];
        if (dkk > nk - 1)
            throw ValidationError("d[" + std::to_string(k + 1) + "][" + std::to_string(k + 1) + "] = " +
                                  std::to_string(dkk) + " exceeds n_k - 1 = " + std::to_string(nk - 1));
        if ((nk * dkk) % 2 != 0)
            throw ValidationError("n_k * d_kk must be even for cell " + std::to_string(k + 1) + " (" +
                                  std::to_string(nk) + " * " + std::to_string(dkk) + ")");
        for (std::size_t l = 0; l < c; ++l) {
            if (l == k) continue;
            const std::size_t dkl = spec.degrees[k][l];
            const std::size_t dlk = spec.degrees[l][k];
            if (dkl > spec.sizes[l])
                throw ValidationError("d[" + std::to_string(k + 1) + "][" + std::to_string(l + 1) + "] = " +
                                      std::to_string(dkl) + " exceeds n_l = " + std::to_string(spec.sizes[l]));
            if (nk * dkl != spec.sizes[l] * dlk)
                throw ValidationError("edge-count inconsistency between cells " + std::to_string(k + 1) + " and " +
                                      std::to_string(l + 1) + ": " + std::to_string(nk) + "*" + std::to_string(dkl) +
                                      " != " + std::to_string(spec.sizes[l]) + "*" + std::to_string(dlk));
        }
    }
}

PlantedNetwork generate_planted(const PlantedSpec& spec) {
    check_planted_feasible(spec);
    const std::size_t c = spec.sizes.size();
    const std::size_t n = std::accumulate(spec.sizes.begin(), spec.sizes.end(), std::size_t{0});
    Rng rng(spec.seed);

    std::vector<NodeIndex> relabel(n);
    std::iota(relabel.begin(), relabel.end(), NodeIndex{0});
    if (spec.shuffle_nodes) std::shuffle(relabel.begin(), relabel.end(), rng);

    std::vector<std::vector<NodeIndex>> cells(c);
    for (std::size_t k = 0, next = 0; k < c; ++k)
        for (std::size_t t = 0; t < spec.sizes[k]; ++t) cells[k].push_back(relabel[next++]);

    EdgeSet edges;
    auto attempt = [&](auto&& place, const std::string& what) {
        for (int r = 0; r <= spec.max_retries; ++r)
            if (place()) return;
        throw ValidationError("could not realize " + what + " after " + std::to_string(spec.max_retries) +
                              " retries");
    };
    for (std::size_t k = 0; k < c; ++k) {
        attempt([&] { return place_regular(cells[k], spec.degrees[k][k], rng, edges); },
                "cell " + std::to_string(k + 1) + " internal degree " + std::to_string(spec.degrees[k][k]));
        for (std::size_t l = k + 1; l < c; ++l)
            attempt([&] { return place_bipartite(cells[k], cells[l], spec.degrees[k][l], spec.degrees[l][k], rng, edges); },
                    "cells " + std::to_string(k + 1) + "-" + std::to_string(l + 1));
    }

    std::vector<WeightedEdge> list;
    list.reserve(edges.size());
    for (const auto& [u, v] : edges) list.push_back({u, v, 1.0});
    Network net = Network::from_edges(n, list);
    return {std::move(net), Partition(std::move(cells), n)};
}

}  // namespace csync
