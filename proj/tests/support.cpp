#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "csync/errors.hpp"

#ifndef CSYNC_TEST_DATA_DIR
#error "CSYNC_TEST_DATA_DIR must be defined"
#endif

namespace csync::testing {

std::string data_path(const std::string& relative) { return std::string(CSYNC_TEST_DATA_DIR) + "/" + relative; }

Network load_example(const std::string& name) { return load_edge_list(data_path("networks/" + name + ".edges")); }

Partition load_cells(const Network& net, const std::string& name) {
    std::ifstream in(data_path("networks/" + name + ".cells"));
    if (!in) throw IoError("missing cells file " + name);
    return read_cells(in, net);
}

Network path3() { return Network::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }

std::vector<std::vector<NodeIndex>> canonical_cells(std::vector<std::vector<NodeIndex>> cells) {
    for (auto& c : cells) std::sort(c.begin(), c.end());
    std::sort(cells.begin(), cells.end());
    return cells;
}

std::vector<std::vector<std::vector<NodeIndex>>> all_set_partitions(std::size_t n) {
    std::vector<std::vector<std::vector<NodeIndex>>> out;
    if (n == 0) return out;
    std::vector<std::size_t> a(n, 0);
    while (true) {
        const std::size_t blocks = *std::max_element(a.begin(), a.end()) + 1;
        std::vector<std::vector<NodeIndex>> cells(blocks);
        for (std::size_t i = 0; i < n; ++i) cells[a[i]].push_back(i);
        out.push_back(std::move(cells));
        // next restricted growth string
        std::size_t i = n - 1;
        while (i > 0) {
            const std::size_t prefix_max = *std::max_element(a.begin(), a.begin() + static_cast<long>(i));
            if (a[i] <= prefix_max) {
                ++a[i];
                std::fill(a.begin() + static_cast<long>(i) + 1, a.end(), 0);
                break;
            }
            --i;
        }
        if (i == 0) break;
    }
    return out;
}

namespace {

bool equitable_exact(const Eigen::MatrixXd& a, const std::vector<std::vector<NodeIndex>>& cells) {
    for (const auto& target : cells)
        for (const auto& cell : cells) {
            double first = 0.0;
            for (std::size_t idx = 0; idx < cell.size(); ++idx) {
                double s = 0.0;
                for (NodeIndex v : target) s += a(static_cast<Eigen::Index>(cell[idx]), static_cast<Eigen::Index>(v));
                if (idx == 0) first = s;
                else if (s != first) return false;
            }
        }
    return true;
}

}  // namespace

std::vector<std::vector<NodeIndex>> brute_force_coarsest(const Network& net) {
    std::vector<std::vector<NodeIndex>> best;
    for (auto& cells : all_set_partitions(net.size()))
        if (equitable_exact(net.adjacency(), cells) && (best.empty() || cells.size() < best.size())) best = cells;
    return canonical_cells(best);
}

std::size_t dense_commutant_dim(const Network& net, const std::vector<std::vector<NodeIndex>>& cells) {
    const auto n = static_cast<Eigen::Index>(net.size());
    std::vector<Eigen::MatrixXd> family{net.adjacency()};
    for (const auto& cell : cells) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
        for (NodeIndex v : cell) e(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)) = 1.0;
        family.push_back(e);
    }
    // vec(PM - MP) = (M^T (x) I - I (x) M) vec(P)
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd system(static_cast<Eigen::Index>(family.size()) * n * n, n * n);
    for (std::size_t f = 0; f < family.size(); ++f) {
        const Eigen::MatrixXd& m = family[f];
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n * n, n * n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                block.block(i * n, j * n, n, n) += m(j, i) * id;
                block.block(i * n, j * n, n, n) -= id(i, j) * m;
            }
        system.middleRows(static_cast<Eigen::Index>(f) * n * n, n * n) = block;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    lu.setThreshold(1e-10);
    return static_cast<std::size_t>(lu.dimensionOfKernel());
}

std::vector<Network> connected_graphs(std::size_t n) {
    std::vector<std::pair<NodeIndex, NodeIndex>> slots;
    for (NodeIndex u = 0; u < n; ++u)
        for (NodeIndex v = u + 1; v < n; ++v) slots.emplace_back(u, v);
    std::vector<Network> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << slots.size()); ++mask) {
        std::vector<WeightedEdge> edges;
        for (std::size_t s = 0; s < slots.size(); ++s)
            if (mask >> s & 1U) edges.push_back({slots[s].first, slots[s].second, 1.0});
        Network net = Network::from_edges(n, edges);
        if (is_connected(net)) out.push_back(std::move(net));
    }
    return out;
}

double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) return 1.0;
    const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                               Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
                               Eigen::MatrixXd::Identity(b.rows(), b.cols());
    const Eigen::MatrixXd residual = qa - qb * (qb.transpose() * qa);
    return Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues()(0);
}

std::optional<PlantedNetwork> random_planted(std::mt19937_64& rng, std::size_t max_n) {
    std::uniform_int_distribution<std::size_t> cell_count(2, 7);
    std::uniform_int_distribution<std::size_t> cell_size(1, 8);
    PlantedSpec spec;
    const std::size_t c = cell_count(rng);
    std::size_t total = 0;
    for (std::size_t k = 0; k < c; ++k) {
        const std::size_t s = cell_size(rng);
        if (total + s > max_n) break;
        spec.sizes.push_back(s);
        total += s;
    }
    if (spec.sizes.size() < 2) return std::nullopt;
    const std::size_t cc = spec.sizes.size();
    spec.degrees.assign(cc, std::vector<std::size_t>(cc, 0));
    std::bernoulli_distribution coin(0.5);
    for (std::size_t k = 0; k < cc; ++k) {
        const std::size_t nk = spec.sizes[k];
        std::vector<std::size_t> options;
        for (std::size_t d = 0; d < nk; ++d)
            if ((nk * d) % 2 == 0) options.push_back(d);
        spec.degrees[k][k] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
        for (std::size_t l = k + 1; l < cc; ++l) {
            if (!coin(rng)) continue;
            const std::size_t nl = spec.sizes[l];
            const std::size_t g = std::gcd(nk, nl);
            const std::size_t t = std::uniform_int_distribution<std::size_t>(1, g)(rng);
            spec.degrees[k][l] = t * nl / g;
            spec.degrees[l][k] = t * nk / g;
        }
    }
    spec.seed = rng();
    try {
        check_planted_feasible(spec);
        return generate_planted(spec);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace csync::testing
