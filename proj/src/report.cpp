#include "csync/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace csync {

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

nlohmann::json run_meta(const nlohmann::json& config, std::uint64_t seed) {
    return {{"tool", "csync"}, {"version", CSYNC_VERSION}, {"config_hash", config_hash(config)}, {"seed", seed},
            {"config", config}};
}

nlohmann::json block_report(const SbdResult& result) {
    const auto& ct = result.transform;
    nlohmann::json classes = nlohmann::json::array();
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t k = 0; k < ct.block_count(); ++k) {
        classes.push_back(to_string(ct.block_class[k]));
        nlohmann::json c = nlohmann::json::array();
        for (std::size_t cl : ct.block_clusters[k]) c.push_back(cl + 1);
        clusters.push_back(std::move(c));
    }
    return {{"N", result.partition.node_count()},
            {"C", result.partition.cluster_count()},
            {"n_rows", result.n_rows},
            {"n_cols", result.n_cols},
            {"commutant_dim", result.basis.dim()},
            {"block_sizes", ct.block_sizes},
            {"classes", std::move(classes)},
            {"clusters_per_block", std::move(clusters)},
            {"p1", result.params.p1},
            {"p2", result.params.p2},
            {"eps_zero", ct.eps_zero},
            {"sample",
             {{"seed", result.element.seed},
              {"attempts", result.element.attempts},
              {"min_gap_ratio", std::isfinite(result.element.min_gap_ratio) ? nlohmann::json(result.element.min_gap_ratio)
                                                                             : nlohmann::json(nullptr)},
              {"fully_degenerate", result.element.fully_degenerate}}},
            {"residuals", result.report.to_json()}};
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

void write_matrix_triplets(std::ostream& out, const Eigen::MatrixXd& m, double tol) {
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (std::fabs(m(i, j)) > tol) {
                std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
                out << i << ' ' << j << ' ' << buf << '\n';
            }
}

void write_spectrum_tail_csv(std::ostream& out, const CommutantBasis& basis) {
    out << "index,eigenvalue\n";
    const Eigen::VectorXd tail = basis.spectrum_tail();
    char buf[32];
    for (Eigen::Index k = 0; k < tail.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", tail(k));
        out << k << ',' << buf << '\n';
    }
}

void write_exponents_csv(std::ostream& out, const std::vector<BlockExponents>& blocks) {
    out << "block,class,exponent_index,exponent\n";
    char buf[32];
    for (const auto& b : blocks)
        for (std::size_t i = 0; i < b.exponents.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.10g", b.exponents[i]);
            out << b.block << ',' << to_string(b.block_class) << ',' << i << ',' << buf << '\n';
        }
}

}  // namespace csync
