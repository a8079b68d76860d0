#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace csync {

using NodeIndex = std::size_t;

struct WeightedEdge {
    NodeIndex u;
    NodeIndex v;
    double weight = 1.0;

    bool operator==(const WeightedEdge&) const = default;
};

/// Undirected weighted network over N labeled nodes. The adjacency matrix is
/// exactly symmetric with a zero diagonal; both are checked on construction.
class Network {
public:
    Network(Eigen::MatrixXd adjacency, std::vector<std::string> labels);
    explicit Network(Eigen::MatrixXd adjacency);

    static Network from_edges(std::size_t n, const std::vector<WeightedEdge>& edges,
                              std::vector<std::string> labels = {});

    std::size_t size() const noexcept { return static_cast<std::size_t>(adjacency_.rows()); }
    const Eigen::MatrixXd& adjacency() const noexcept { return adjacency_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    double weight(NodeIndex u, NodeIndex v) const { return adjacency_(u, v); }

    /// Edges with u < v, in row-major order.
    std::vector<WeightedEdge> edges() const;
    std::size_t edge_count() const;
    std::vector<std::vector<NodeIndex>> neighbors() const;

    bool all_integer_weights() const;

    /// Returns a copy with A_uv = A_vu = w.
    Network with_weight(NodeIndex u, NodeIndex v, double w) const;
    /// Node-induced subnetwork; labels follow the nodes.
    Network induced(const std::vector<NodeIndex>& nodes) const;

    bool operator==(const Network& other) const;

private:
    Eigen::MatrixXd adjacency_;
    std::vector<std::string> labels_;
};

/// Node names follow the indexing base of the source file ("1".."N" for
/// 1-based input) unless supplied explicitly.
std::vector<std::string> default_labels(std::size_t n, int base = 1);

/// Index of the node carrying `label`; throws ValidationError when absent.
NodeIndex node_by_label(const Network& net, const std::string& label);

struct EdgeParam {
    NodeIndex u;
    NodeIndex v;
    std::string name;
    double value = 1.0;
};

struct EdgeListOptions {
    int indexing_base = 1;
    /// Accept an optional third column as the edge weight.
    bool weighted = false;
    /// Accept and discard a third column (every edge gets weight 1).
    bool unweight = false;
};

/// Edge-list dialect: one edge per line, "u v" or "u v w", whitespace
/// separated; '#' starts a comment. A comment of the form "# N=<int>"
/// declares the node count so isolated nodes survive a round trip.
Network load_edge_list(std::istream& in, const EdgeListOptions& options = {});
Network load_edge_list(const std::filesystem::path& path, const EdgeListOptions& options = {});
void save_edge_list(std::ostream& out, const Network& net, const EdgeListOptions& options = {});

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

Network largest_connected_component(const Network& net);
std::vector<std::vector<NodeIndex>> connected_components(const Network& net);
bool is_connected(const Network& net);

}  // namespace csync
