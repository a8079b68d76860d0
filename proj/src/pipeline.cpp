#include "csync/pipeline.hpp"

#include <algorithm>
#include <functional>

#include "csync/errors.hpp"

namespace csync {

void SbdOptions::validate() const {
    if (!(tol_rel > 0.0)) throw ValidationError("tol_rel must be positive");
    if (!(eps_zero_rel > 0.0)) throw ValidationError("eps_zero must be positive");
    if (!(gap_tol > 0.0)) throw ValidationError("gap_tol must be positive");
    if (max_retries < 0) throw ValidationError("max_retries must be non-negative");
}

SbdResult run_canonical_sbd(const Network& net, const Partition& part, const SbdOptions& options) {
    options.validate();
    IndicatorSet ind = build_indicators(net, part);
    CommutantProblem prob = assemble_problem(ind);
    CommutantBasis basis = nullspace(prob, options.tol_rel);
    CommutantElement element = sample_element(basis, options.seed, options.gap_tol, options.max_retries);
    CanonicalTransform ct = build_transform(ind, element, options.eps_zero_rel);
    CanonicalReport report;
    if (options.verify) report = verify_canonical(ct, ind);
    ParameterCount params = parameter_count(ct.block_sizes, ind.cluster_count());
    return SbdResult{part,
                     std::move(ind),
                     prob.n_rows,
                     prob.n_cols,
                     std::move(basis),
                     std::move(element),
                     std::move(ct),
                     report,
                     params};
}

SeedConsistency verify_with_seeds(const Network& net, const Partition& part, const SbdOptions& options, std::size_t k) {
    options.validate();
    const IndicatorSet ind = build_indicators(net, part);
    const CommutantBasis basis = nullspace(assemble_problem(ind), options.tol_rel);

    SeedConsistency out;
    for (std::size_t s = 0; s < k; ++s) {
        const std::uint64_t seed = options.seed + 1000 * s;
        const CommutantElement p = sample_element(basis, seed, options.gap_tol, options.max_retries);
        const CanonicalTransform ct = build_transform(ind, p, options.eps_zero_rel);
        std::vector<std::size_t> sizes = ct.block_sizes;
        std::sort(sizes.begin(), sizes.end(), std::greater<>());
        std::vector<std::vector<std::size_t>> clusters = ct.block_clusters;
        std::sort(clusters.begin(), clusters.end());
        out.seeds.push_back(seed);
        out.block_multisets.push_back(std::move(sizes));
        out.cluster_multisets.push_back(std::move(clusters));
    }
    for (std::size_t s = 1; s < out.seeds.size(); ++s)
        if (out.block_multisets[s] != out.block_multisets[0] || out.cluster_multisets[s] != out.cluster_multisets[0])
            out.consistent = false;
    return out;
}

}  // namespace csync
