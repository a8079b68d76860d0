#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "csync/graph.hpp"

namespace csync {

/// A partition of the nodes into C cells. Cells are kept in ascending order of
/// their smallest node index and nodes ascend within a cell, so cluster k
/// occupies positions [offset(k), offset(k+1)) of the cluster-contiguous order.
class Partition {
public:
    Partition(std::vector<std::vector<NodeIndex>> cells, std::size_t n_nodes);

    std::size_t cluster_count() const noexcept { return cells_.size(); }
    std::size_t node_count() const noexcept { return position_.size(); }
    const std::vector<std::vector<NodeIndex>>& cells() const noexcept { return cells_; }
    std::size_t size(std::size_t k) const { return cells_.at(k).size(); }
    std::vector<std::size_t> sizes() const;
    std::size_t offset(std::size_t k) const { return offsets_.at(k); }

    /// position()[node] = index of `node` in the cluster-contiguous order.
    const std::vector<std::size_t>& position() const noexcept { return position_; }
    /// order()[p] = node sitting at position p.
    const std::vector<NodeIndex>& order() const noexcept { return order_; }
    std::size_t cell_of(NodeIndex node) const { return cell_of_.at(node); }

    /// Cells of size > 1.
    std::size_t nontrivial_count() const;
    std::size_t max_cell_size() const;

    bool operator==(const Partition&) const = default;

private:
    std::vector<std::vector<NodeIndex>> cells_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> position_;
    std::vector<NodeIndex> order_;
    std::vector<std::size_t> cell_of_;
};

Partition single_cell(std::size_t n);

struct EquitableWitness {
    NodeIndex i;
    NodeIndex j;
    std::size_t cell;  ///< target cell, as indexed in the input cell list
    double sum_i;
    double sum_j;
};

struct EquitableCheck {
    bool equitable = true;
    std::optional<EquitableWitness> witness;

    explicit operator bool() const noexcept { return equitable; }
};

/// Every node of a cell must see the same total weight into every cell.
/// Throws ValidationError when `cells` is not a partition of the nodes.
EquitableCheck check_equitable(const Network& net, const std::vector<std::vector<NodeIndex>>& cells);
EquitableCheck check_equitable(const Network& net, const Partition& part);

/// Color refinement from `initial`: cells are split by the vector of weighted
/// degree sums into the current cells until stable.
Partition refine_partition(const Network& net, const Partition& initial);

/// The unique coarsest equitable partition (refinement from one cell).
Partition coarsest_equitable_partition(const Network& net);

/// Cluster-contiguous matrices for a given equitable partition.
struct IndicatorSet {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> offsets;        ///< size C + 1
    std::vector<std::size_t> coord_cluster;  ///< cluster of each contiguous position
    Eigen::MatrixXd adjacency;               ///< A in cluster-contiguous order
    Eigen::MatrixXd encoding;                ///< O, N x C
    Eigen::MatrixXd quotient;                ///< Q, C x C
    Eigen::MatrixXd delta;                   ///< (O^T O)^{-1/2} O^T, C x N

    std::size_t cluster_count() const noexcept { return sizes.size(); }
    std::size_t node_count() const noexcept { return coord_cluster.size(); }
    /// Diagonal of E_k as a 0/1 vector.
    Eigen::VectorXd indicator(std::size_t k) const;
};

/// Throws ValidationError carrying the witness if `part` is not equitable.
IndicatorSet build_indicators(const Network& net, const Partition& part);

/// Eigenvalues of Q sorted by (real, imag).
std::vector<std::complex<double>> quotient_spectrum(const IndicatorSet& ind);

/// Cells file: one line per cell, whitespace-separated node labels; '#' comments.
Partition read_cells(std::istream& in, const Network& net);
void write_cells(std::ostream& out, const Network& net, const Partition& part);

nlohmann::json partition_json(const Network& net, const Partition& part);

}  // namespace csync
