#include "csync/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

#include "csync/errors.hpp"

namespace csync {

namespace {

void validate(const Eigen::MatrixXd& a, const std::vector<std::string>& labels) {
    if (a.rows() < 1) throw ValidationError("network must have at least one node");
    if (a.rows() != a.cols()) throw ValidationError("adjacency matrix must be square");
    if (labels.size() != static_cast<std::size_t>(a.rows()))
        throw ValidationError("expected " + std::to_string(a.rows()) + " node labels, got " +
                              std::to_string(labels.size()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (a(i, i) != 0.0)
            throw ValidationError("self-loop on node " + labels[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            if (!std::isfinite(a(i, j)))
                throw ValidationError("non-finite weight between " + labels[static_cast<std::size_t>(i)] +
                                      " and " + labels[static_cast<std::size_t>(j)]);
            if (a(i, j) != a(j, i))
                throw ValidationError("adjacency is not symmetric at (" + labels[static_cast<std::size_t>(i)] +
                                      ", " + labels[static_cast<std::size_t>(j)] + ")");
        }
    }
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        if (i >= s.size()) break;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

long long parse_int(std::string_view tok, std::size_t line) {
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError(line, "expected an integer node id, got '" + std::string(tok) + "'");
    return v;
}

double parse_weight(std::string_view tok, std::size_t line) {
    // from_chars for double is not available in every libstdc++ we target.
    std::string s(tok);
    std::size_t used = 0;
    double w = 0.0;
    try {
        w = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError(line, "expected a numeric weight, got '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(w))
        throw ParseError(line, "expected a numeric weight, got '" + s + "'");
    return w;
}

}  // namespace

std::vector<std::string> default_labels(std::size_t n, int base) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(static_cast<long long>(i) + base);
    return labels;
}

NodeIndex node_by_label(const Network& net, const std::string& label) {
    const auto& labels = net.labels();
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw ValidationError("unknown node label '" + label + "'");
    return static_cast<NodeIndex>(it - labels.begin());
}

Network::Network(Eigen::MatrixXd adjacency, std::vector<std::string> labels)
    : adjacency_(std::move(adjacency)), labels_(std::move(labels)) {
    validate(adjacency_, labels_);
}

Network::Network(Eigen::MatrixXd adjacency)
    : Network(adjacency, default_labels(static_cast<std::size_t>(adjacency.rows()))) {}

Network Network::from_edges(std::size_t n, const std::vector<WeightedEdge>& edges,
                            std::vector<std::string> labels) {
    if (labels.empty()) labels = default_labels(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& e : edges) {
        if (e.u >= n || e.v >= n) throw ValidationError("edge endpoint out of range");
        if (e.u == e.v) throw ValidationError("self-loop on node " + std::to_string(e.u));
        a(e.u, e.v) = e.weight;
        a(e.v, e.u) = e.weight;
    }
    return Network(std::move(a), std::move(labels));
}

std::vector<WeightedEdge> Network::edges() const {
    std::vector<WeightedEdge> out;
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (adjacency_(i, j) != 0.0) out.push_back({i, j, adjacency_(i, j)});
    return out;
}

std::size_t Network::edge_count() const {
    std::size_t count = 0;
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (adjacency_(i, j) != 0.0) ++count;
    return count;
}

std::vector<std::vector<NodeIndex>> Network::neighbors() const {
    const std::size_t n = size();
    std::vector<std::vector<NodeIndex>> nb(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (adjacency_(i, j) != 0.0) nb[j].push_back(i);
    return nb;
}

bool Network::all_integer_weights() const {
    return (adjacency_.array() == adjacency_.array().round()).all();
}

Network Network::with_weight(NodeIndex u, NodeIndex v, double w) const {
    if (u >= size() || v >= size()) throw ValidationError("edge endpoint out of range");
    if (u == v) throw ValidationError("self-loop on node " + labels_[u]);
    Eigen::MatrixXd a = adjacency_;
    a(u, v) = w;
    a(v, u) = w;
    return Network(std::move(a), labels_);
}

Network Network::induced(const std::vector<NodeIndex>& nodes) const {
    const auto k = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd a(k, k);
    std::vector<std::string> labels;
    labels.reserve(nodes.size());
    for (Eigen::Index r = 0; r < k; ++r) {
        labels.push_back(labels_.at(nodes[static_cast<std::size_t>(r)]));
        for (Eigen::Index c = 0; c < k; ++c)
            a(r, c) = adjacency_(nodes[static_cast<std::size_t>(r)], nodes[static_cast<std::size_t>(c)]);
    }
    return Network(std::move(a), std::move(labels));
}

bool Network::operator==(const Network& other) const {
    return labels_ == other.labels_ && adjacency_.rows() == other.adjacency_.rows() &&
           adjacency_ == other.adjacency_;
}

Network load_edge_list(std::istream& in, const EdgeListOptions& options) {
    if (options.indexing_base != 0 && options.indexing_base != 1)
        throw ValidationError("indexing base must be 0 or 1");

    // (min, max) -> (weight, line of first occurrence, orientation)
    struct Seen {
        double weight;
        std::size_t line;
        NodeIndex first_u;
    };
    std::map<std::pair<NodeIndex, NodeIndex>, Seen> seen;
    long long declared_n = -1;
    NodeIndex max_node = 0;
    bool any_node = false;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) {
            const auto comment = trim(line.substr(hash + 1));
            if (comment.size() > 2 && comment.substr(0, 2) == "N=") {
                const long long n = parse_int(trim(comment.substr(2)), line_no);
                if (n < 1) throw ParseError(line_no, "declared node count must be positive");
                declared_n = n;
            }
            line = line.substr(0, hash);
        }
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 2 && tokens.size() != 3)
            throw ParseError(line_no, "expected 'u v' or 'u v w'");
        if (tokens.size() == 3 && !options.weighted && !options.unweight)
            throw ParseError(line_no, "weight column present; load as weighted or unweighted");

        const long long ru = parse_int(tokens[0], line_no);
        const long long rv = parse_int(tokens[1], line_no);
        if (ru < options.indexing_base || rv < options.indexing_base)
            throw ParseError(line_no, "node id below indexing base " + std::to_string(options.indexing_base));
        const auto u = static_cast<NodeIndex>(ru - options.indexing_base);
        const auto v = static_cast<NodeIndex>(rv - options.indexing_base);
        if (u == v) throw ParseError(line_no, "self-loop on node " + std::string(tokens[0]));

        double w = 1.0;
        if (tokens.size() == 3 && options.weighted && !options.unweight) w = parse_weight(tokens[2], line_no);

        const auto key = std::minmax(u, v);
        auto [it, inserted] = seen.try_emplace({key.first, key.second}, Seen{w, line_no, u});
        if (!inserted) {
            if (it->second.first_u == u)
                throw ParseError(line_no, "duplicate edge (first seen on line " +
                                              std::to_string(it->second.line) + ")");
            if (it->second.weight != w)
                throw ParseError(line_no, "reverse duplicate with conflicting weight (line " +
                                              std::to_string(it->second.line) + ")");
        }
        max_node = std::max({max_node, u, v});
        any_node = true;
    }
    if (in.bad()) throw IoError("read failure while loading edge list");

    std::size_t n = any_node ? max_node + 1 : 0;
    if (declared_n >= 0) {
        if (static_cast<std::size_t>(declared_n) < n)
            throw ValidationError("edge list references node beyond declared N=" + std::to_string(declared_n));
        n = static_cast<std::size_t>(declared_n);
    }
    if (n == 0) throw ValidationError("edge list is empty and declares no nodes");

    std::vector<WeightedEdge> edges;
    edges.reserve(seen.size());
    for (const auto& [key, s] : seen) edges.push_back({key.first, key.second, s.weight});
    return Network::from_edges(n, edges, default_labels(n, options.indexing_base));
}

Network load_edge_list(const std::filesystem::path& path, const EdgeListOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return load_edge_list(in, options);
}

void save_edge_list(std::ostream& out, const Network& net, const EdgeListOptions& options) {
    out << "# N=" << net.size() << '\n';
    bool weighted = options.weighted;
    for (const auto& e : net.edges()) weighted = weighted || e.weight != 1.0;
    std::ostringstream buf;
    buf.precision(17);
    for (const auto& e : net.edges()) {
        buf << (e.u + static_cast<std::size_t>(options.indexing_base)) << ' '
            << (e.v + static_cast<std::size_t>(options.indexing_base));
        if (weighted) buf << ' ' << e.weight;
        buf << '\n';
    }
    out << buf.str();
    if (!out) throw IoError("write failure while saving edge list");
}

nlohmann::json to_json(const Network& net) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : net.edges()) edges.push_back({e.u, e.v, e.weight});
    return {{"n", net.size()}, {"labels", net.labels()}, {"edges", edges}};
}

Network network_from_json(const nlohmann::json& j) {
    try {
        const auto n = j.at("n").get<std::size_t>();
        auto labels = j.at("labels").get<std::vector<std::string>>();
        std::vector<WeightedEdge> edges;
        for (const auto& e : j.at("edges")) {
            const auto u = e.at(0).get<std::size_t>();
            const auto v = e.at(1).get<std::size_t>();
            if (u >= v) throw ValidationError("JSON edges must be listed once with i < j");
            edges.push_back({u, v, e.at(2).get<double>()});
        }
        return Network::from_edges(n, edges, std::move(labels));
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError(std::string("malformed network JSON: ") + ex.what());
    }
}

std::vector<std::vector<NodeIndex>> connected_components(const Network& net) {
    const auto nb = net.neighbors();
    const std::size_t n = net.size();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<NodeIndex>> out;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(out.size());
        out.emplace_back();
        std::vector<NodeIndex> stack{s};
        comp[s] = id;
        while (!stack.empty()) {
            const NodeIndex x = stack.back();
            stack.pop_back();
            out.back().push_back(x);
            for (NodeIndex y : nb[x])
                if (comp[y] < 0) {
                    comp[y] = id;
                    stack.push_back(y);
                }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    return out;
}

bool is_connected(const Network& net) { return connected_components(net).size() == 1; }

Network largest_connected_component(const Network& net) {
    auto comps = connected_components(net);
    // Components come out ordered by their smallest node, so the first
    // maximum wins ties.
    std::size_t best = 0;
    for (std::size_t c = 1; c < comps.size(); ++c)
        if (comps[c].size() > comps[best].size()) best = c;
    if (comps[best].size() == net.size()) return net;
    return net.induced(comps[best]);
}

}  // namespace csync
