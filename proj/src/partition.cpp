#include "csync/partition.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "csync/errors.hpp"

namespace csync {

namespace {

constexpr double kWeightRelTol = 1e-9;

bool sums_equal(double a, double b, bool exact) {
    if (exact) return a == b;
    return std::fabs(a - b) <= kWeightRelTol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

void require_partition(const std::vector<std::vector<NodeIndex>>& cells, std::size_t n) {
    std::vector<int> seen(n, 0);
    for (const auto& cell : cells) {
        if (cell.empty()) throw ValidationError("partition contains an empty cell");
        for (NodeIndex v : cell) {
            if (v >= n) throw ValidationError("partition references node " + std::to_string(v) + " of " +
                                              std::to_string(n));
            if (seen[v]++) throw ValidationError("node " + std::to_string(v) + " appears in two cells");
        }
    }
    for (std::size_t v = 0; v < n; ++v)
        if (!seen[v]) throw ValidationError("node " + std::to_string(v) + " is not covered by any cell");
}

/// Cell index per node -> normalized cells (ascending min node, nodes ascending).
std::vector<std::vector<NodeIndex>> cells_from_colors(const std::vector<std::size_t>& color) {
    std::map<std::size_t, std::vector<NodeIndex>> by_color;
    for (NodeIndex v = 0; v < color.size(); ++v) by_color[color[v]].push_back(v);
    std::vector<std::vector<NodeIndex>> cells;
    cells.reserve(by_color.size());
    for (auto& [c, nodes] : by_color) cells.push_back(std::move(nodes));
    std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return cells;
}

}  // namespace

Partition::Partition(std::vector<std::vector<NodeIndex>> cells, std::size_t n_nodes) {
    require_partition(cells, n_nodes);
    for (auto& cell : cells) std::sort(cell.begin(), cell.end());
    std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    cells_ = std::move(cells);

    offsets_.assign(cells_.size() + 1, 0);
    position_.assign(n_nodes, 0);
    cell_of_.assign(n_nodes, 0);
    order_.reserve(n_nodes);
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        offsets_[k + 1] = offsets_[k] + cells_[k].size();
        for (NodeIndex v : cells_[k]) {
            position_[v] = order_.size();
            cell_of_[v] = k;
            order_.push_back(v);
        }
    }
}

std::vector<std::size_t> Partition::sizes() const {
    std::vector<std::size_t> s;
    s.reserve(cells_.size());
    for (const auto& c : cells_) s.push_back(c.size());
    return s;
}

std::size_t Partition::nontrivial_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.size() > 1; }));
}

std::size_t Partition::max_cell_size() const {
    std::size_t m = 0;
    for (const auto& c : cells_) m = std::max(m, c.size());
    return m;
}

Partition single_cell(std::size_t n) {
    std::vector<NodeIndex> all(n);
    std::iota(all.begin(), all.end(), NodeIndex{0});
    return Partition({all}, n);
}

EquitableCheck check_equitable(const Network& net, const std::vector<std::vector<NodeIndex>>& cells) {
    require_partition(cells, net.size());
    const bool exact = net.all_integer_weights();
    const auto& a = net.adjacency();
    auto row_sum = [&](NodeIndex i, const std::vector<NodeIndex>& cell) {
        double s = 0.0;
        for (NodeIndex h : cell) s += a(i, h);
        return s;
    };
    for (const auto& cell : cells) {
        for (std::size_t l = 0; l < cells.size(); ++l) {
            const double ref = row_sum(cell.front(), cells[l]);
            for (std::size_t t = 1; t < cell.size(); ++t) {
                const double s = row_sum(cell[t], cells[l]);
                if (!sums_equal(ref, s, exact))
                    return {false, EquitableWitness{cell.front(), cell[t], l, ref, s}};
            }
        }
    }
    return {};
}

EquitableCheck check_equitable(const Network& net, const Partition& part) {
    return check_equitable(net, part.cells());
}

Partition refine_partition(const Network& net, const Partition& initial) {
    const std::size_t n = net.size();
    if (initial.node_count() != n) throw ValidationError("initial partition does not match network size");
    const bool exact = net.all_integer_weights();
    const auto nb = net.neighbors();
    const auto& a = net.adjacency();

    std::vector<std::size_t> color(n);
    for (NodeIndex v = 0; v < n; ++v) color[v] = initial.cell_of(v);
    std::size_t n_colors = initial.cluster_count();

    std::vector<double> sums;
    while (true) {
        sums.assign(n * n_colors, 0.0);
        for (NodeIndex i = 0; i < n; ++i)
            for (NodeIndex h : nb[i]) sums[i * n_colors + color[h]] += a(i, h);

        std::vector<std::size_t> next(n);
        std::size_t n_next = 0;
        if (exact) {
            std::map<std::vector<double>, std::size_t> ids;
            std::vector<double> key(n_colors + 1);
            for (NodeIndex i = 0; i < n; ++i) {
                key[0] = static_cast<double>(color[i]);
                std::copy_n(sums.begin() + static_cast<std::ptrdiff_t>(i * n_colors), n_colors, key.begin() + 1);
                auto [it, inserted] = ids.try_emplace(key, n_next);
                if (inserted) ++n_next;
                next[i] = it->second;
            }
        } else {
            // Greedy grouping against the first member of each group keeps the
            // tolerant comparison deterministic.
            std::vector<NodeIndex> representative;
            for (NodeIndex i = 0; i < n; ++i) {
                std::size_t found = representative.size();
                for (std::size_t g = 0; g < representative.size(); ++g) {
                    const NodeIndex r = representative[g];
                    if (color[r] != color[i]) continue;
                    bool same = true;
                    for (std::size_t c = 0; c < n_colors && same; ++c)
                        same = sums_equal(sums[r * n_colors + c], sums[i * n_colors + c], false);
                    if (same) {
                        found = g;
                        break;
                    }
                }
                if (found == representative.size()) representative.push_back(i);
                next[i] = found;
            }
            n_next = representative.size();
        }
        color = std::move(next);
        if (n_next == n_colors) break;
        n_colors = n_next;
    }
    return Partition(cells_from_colors(color), n);
}

Partition coarsest_equitable_partition(const Network& net) {
    return refine_partition(net, single_cell(net.size()));
}

Eigen::VectorXd IndicatorSet::indicator(std::size_t k) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(node_count()));
    e.segment(static_cast<Eigen::Index>(offsets.at(k)), static_cast<Eigen::Index>(sizes.at(k))).setOnes();
    return e;
}

IndicatorSet build_indicators(const Network& net, const Partition& part) {
    if (part.node_count() != net.size()) throw ValidationError("partition does not match network size");
    if (const auto check = check_equitable(net, part); !check) {
        const auto& w = *check.witness;
        std::ostringstream msg;
        msg << "partition is not equitable: nodes " << net.labels()[w.i] << " and " << net.labels()[w.j]
            << " see " << w.sum_i << " vs " << w.sum_j << " into cell " << (w.cell + 1);
        throw ValidationError(msg.str());
    }

    const std::size_t n = net.size();
    const std::size_t c = part.cluster_count();
    const auto ni = static_cast<Eigen::Index>(n);
    const auto ci = static_cast<Eigen::Index>(c);

    IndicatorSet ind;
    ind.sizes = part.sizes();
    ind.offsets.resize(c + 1);
    for (std::size_t k = 0; k <= c; ++k) ind.offsets[k] = part.offset(k);
    ind.coord_cluster.resize(n);
    for (std::size_t p = 0; p < n; ++p) ind.coord_cluster[p] = part.cell_of(part.order()[p]);

    ind.adjacency.resize(ni, ni);
    const auto& a = net.adjacency();
    for (Eigen::Index r = 0; r < ni; ++r)
        for (Eigen::Index s = 0; s < ni; ++s)
            ind.adjacency(r, s) = a(part.order()[static_cast<std::size_t>(r)], part.order()[static_cast<std::size_t>(s)]);

    ind.encoding = Eigen::MatrixXd::Zero(ni, ci);
    for (std::size_t p = 0; p < n; ++p) ind.encoding(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(ind.coord_cluster[p])) = 1.0;

    // Q = (O^T O)^{-1} O^T A O; O^T O is diagonal with the cell sizes.
    Eigen::VectorXd inv_sizes(ci), inv_sqrt_sizes(ci);
    for (std::size_t k = 0; k < c; ++k) {
        inv_sizes(static_cast<Eigen::Index>(k)) = 1.0 / static_cast<double>(ind.sizes[k]);
        inv_sqrt_sizes(static_cast<Eigen::Index>(k)) = 1.0 / std::sqrt(static_cast<double>(ind.sizes[k]));
    }
    ind.quotient = inv_sizes.asDiagonal() * (ind.encoding.transpose() * ind.adjacency * ind.encoding);
    ind.delta = inv_sqrt_sizes.asDiagonal() * ind.encoding.transpose();
    return ind;
}

std::vector<std::complex<double>> quotient_spectrum(const IndicatorSet& ind) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(ind.quotient, false);
    std::vector<std::complex<double>> ev;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) ev.push_back(solver.eigenvalues()(i));
    std::sort(ev.begin(), ev.end(), [](const auto& x, const auto& y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return ev;
}

Partition read_cells(std::istream& in, const Network& net) {
    std::vector<std::vector<NodeIndex>> cells;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        std::istringstream tokens(raw);
        std::vector<NodeIndex> cell;
        std::string label;
        while (tokens >> label) {
            try {
                cell.push_back(node_by_label(net, label));
            } catch (const ValidationError& e) {
                throw ParseError(line_no, e.what());
            }
        }
        if (!cell.empty()) cells.push_back(std::move(cell));
    }
    if (in.bad()) throw IoError("read failure while loading cells");
    return Partition(std::move(cells), net.size());
}

void write_cells(std::ostream& out, const Network& net, const Partition& part) {
    for (const auto& cell : part.cells()) {
        for (std::size_t t = 0; t < cell.size(); ++t) out << (t ? " " : "") << net.labels()[cell[t]];
        out << '\n';
    }
}

nlohmann::json partition_json(const Network& net, const Partition& part) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : part.cells()) {
        nlohmann::json labels = nlohmann::json::array();
        for (NodeIndex v : cell) labels.push_back(net.labels()[v]);
        cells.push_back(labels);
    }
    return {{"C", part.cluster_count()}, {"cells", cells}, {"sizes", part.sizes()}};
}

}  // namespace csync
