#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "csync/pipeline.hpp"
#include "csync/stability.hpp"

namespace csync {

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& data);

/// Hash of the canonical (sorted-key, compact) dump of `config`.
std::string config_hash(const nlohmann::json& config);

/// {"tool", "version", "config_hash", "seed", "config"}.
nlohmann::json run_meta(const nlohmann::json& config, std::uint64_t seed);

/// {"block_sizes", "classes", "clusters_per_block", "p1", "p2", "residuals", ...}.
/// Clusters are reported 1-based.
nlohmann::json block_report(const SbdResult& result);

/// Dense CSV with 17 significant digits.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
/// "row col value" lines (0-based) for entries with |value| > tol.
void write_matrix_triplets(std::ostream& out, const Eigen::MatrixXd& m, double tol = 0.0);

/// "index,eigenvalue" lines for the smallest 2d eigenvalues of S^T S.
void write_spectrum_tail_csv(std::ostream& out, const CommutantBasis& basis);

/// "block,class,exponent_index,exponent" lines.
void write_exponents_csv(std::ostream& out, const std::vector<BlockExponents>& blocks);

}  // namespace csync
