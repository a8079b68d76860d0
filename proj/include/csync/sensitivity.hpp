#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "csync/graph.hpp"
#include "csync/partition.hpp"
#include "csync/transform.hpp"

namespace csync {

/// One affected entry of dB/dq. In-block entries carry the block index and
/// block-local row/col; entries coupling two blocks carry block = -1 and
/// global transformed coordinates.
struct SensitivityEntry {
    long block = -1;
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;

    bool operator==(const SensitivityEntry&) const = default;
};

struct ParamSensitivity {
    std::string name;
    NodeIndex u = 0;
    NodeIndex v = 0;
    bool added = false;  ///< edge absent from the nominal network
    std::vector<SensitivityEntry> entries;
    std::size_t in_block_count = 0;
    std::size_t rotated_in_block_count = 0;  ///< same count under a random in-block rotation of T
    bool equitable_at_perturbation = true;   ///< check_equitable at q +/- delta for the nominal partition
};

struct SensitivityOptions {
    double sens_tol = 1e-10;
    bool allow_new_edges = false;
    double guard_delta = 1e-3;
    std::uint64_t seed = 0;  ///< random rotation for the comparison count
};

struct SensitivityReport {
    std::vector<ParamSensitivity> params;
    /// overlaps[a][b] = number of in-block entries affected by both a and b.
    std::vector<std::vector<std::size_t>> overlaps;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// dB/dq = T^T E_(uv) T with T held at the nominal network; E_(uv) is the
/// symmetric unit edge matrix. Both (r, c) and (c, r) are listed.
SensitivityReport sensitivity(const Network& net, const Partition& part, const CanonicalTransform& ct,
                              const std::vector<EdgeParam>& params, const SensitivityOptions& options = {});

/// "name:i,j=w" with node labels i, j.
EdgeParam parse_edge_param(const std::string& text, const Network& net);

}  // namespace csync
