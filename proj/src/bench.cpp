#include "csync/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>

#include "csync/errors.hpp"

namespace csync {

PlantedSpec planted_bench_spec(std::size_t n, const std::vector<std::size_t>& cell_sizes, std::uint64_t seed) {
    const std::size_t clusters = cell_sizes.size();
    const std::size_t in_cells = std::accumulate(cell_sizes.begin(), cell_sizes.end(), std::size_t{0});
    if (clusters == 0) throw ValidationError("bench spec needs at least one cell");
    for (std::size_t s : cell_sizes)
        if (s < 2) throw ValidationError("bench cells must have at least 2 nodes");
    if (in_cells + 2 * clusters > n) throw ValidationError("bench spec needs at least two singletons per cell");
    const std::size_t singles = n - in_cells;
    const std::size_t c = clusters + singles;

    PlantedSpec spec;
    spec.seed = seed;
    spec.sizes = cell_sizes;
    spec.sizes.resize(c, 1);
    spec.degrees.assign(c, std::vector<std::size_t>(c, 0));
    auto& d = spec.degrees;
    for (std::size_t k = 0; k < clusters; ++k) {
        const std::size_t nk = cell_sizes[k];
        d[k][k] = nk == 2 ? 1 : 2;
    }
    // Every other cell is matched to the next cell of the same size, so some
    // transverse blocks span two intertwined cells.
    for (std::size_t k = 0; k < clusters; k += 2) {
        for (std::size_t l = k + 1; l < clusters; ++l) {
            if (cell_sizes[l] != cell_sizes[k]) continue;
            d[k][l] = d[l][k] = 1;
            break;
        }
    }

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    // Random recursive tree over the singletons plus a few chords.
    for (std::size_t s = 1; s < singles; ++s) {
        const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, s - 1)(rng);
        d[clusters + s][clusters + parent] = d[clusters + parent][clusters + s] = 1;
    }
    for (std::size_t extra = 0; extra < singles / 4; ++extra) {
        const std::size_t a = std::uniform_int_distribution<std::size_t>(0, singles - 1)(rng);
        const std::size_t b = std::uniform_int_distribution<std::size_t>(0, singles - 1)(rng);
        if (a != b) d[clusters + a][clusters + b] = d[clusters + b][clusters + a] = 1;
    }
    std::vector<std::size_t> order(singles);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < clusters; ++k) {
        for (std::size_t t = 0; t < 2; ++t) {
            const std::size_t s = clusters + order[2 * k + t];
            d[s][k] = cell_sizes[k];
            d[k][s] = 1;
        }
    }
    return spec;
}

BenchInstance planted_bench_instance(std::size_t n, const std::vector<std::size_t>& cell_sizes, std::uint64_t seed) {
    PlantedNetwork planted = generate_planted(planted_bench_spec(n, cell_sizes, seed));
    return {"planted_n" + std::to_string(n), std::move(planted.network), std::move(planted.partition)};
}

std::vector<BenchInstance> desk_scale_instances(std::uint64_t seed) {
    auto cycle = [](std::size_t count) {
        static const std::size_t pattern[] = {2, 3, 4, 6};
        std::vector<std::size_t> sizes;
        for (std::size_t k = 0; k < count; ++k) sizes.push_back(pattern[k % 4]);
        return sizes;
    };
    std::vector<BenchInstance> out;
    out.push_back(planted_bench_instance(100, cycle(12), seed));
    out.push_back(planted_bench_instance(200, cycle(16), seed + 1));
    out.push_back(planted_bench_instance(400, cycle(20), seed + 2));
    return out;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <class F>
double seconds(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<BenchRecord> run_bench(const std::vector<BenchInstance>& instances, const BenchOptions& options) {
    if (options.repeats < 3) throw ValidationError("bench needs at least 3 repeats");
    SbdOptions sbd = options.sbd;
    sbd.verify = false;
    std::vector<BenchRecord> records;
    for (const auto& inst : instances) {
        BenchRecord rec;
        rec.name = inst.name;
        rec.n = inst.network.size();
        rec.edges = inst.network.edge_count();
        rec.nontrivial = inst.partition.nontrivial_count();
        rec.max_cluster = inst.partition.max_cell_size();
        rec.baseline_unknowns = rec.n * rec.n;
        for (std::size_t k = 0; k < inst.partition.cluster_count(); ++k)
            rec.canonical_unknowns += inst.partition.size(k) * inst.partition.size(k);
        try {
            std::vector<double> tc, tb;
            std::optional<SbdResult> canonical_result;
            std::optional<BaselineResult> baseline_result;
            if (options.warmup) {
                canonical_result = run_canonical_sbd(inst.network, inst.partition, sbd);
                baseline_result = baseline_sbd(inst.network, inst.partition, options.baseline);
            }
            for (int r = 0; r < options.repeats; ++r) {
                tc.push_back(seconds([&] { canonical_result = run_canonical_sbd(inst.network, inst.partition, sbd); }));
                tb.push_back(seconds([&] { baseline_result = baseline_sbd(inst.network, inst.partition, options.baseline); }));
            }
            rec.t_canonical = median(tc);
            rec.t_baseline = median(tb);
            rec.blocks_canonical = canonical_result->transform.block_sizes;
            std::sort(rec.blocks_canonical.begin(), rec.blocks_canonical.end(), std::greater<>());
            rec.blocks_baseline = baseline_result->block_sizes;
            rec.baseline_iterations = baseline_result->iterations;
            rec.blocks_agree = rec.blocks_canonical == rec.blocks_baseline;
        } catch (const Error& e) {
            rec.error = e.what();
            rec.blocks_agree = false;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
    out << kBenchCsvHeader << '\n';
    char buf[64];
    for (const auto& r : records) {
        out << r.name << ',' << r.n << ',' << r.edges << ',' << r.nontrivial << ',' << r.max_cluster << ',';
        std::snprintf(buf, sizeof buf, "%.6f,%.6f", r.t_baseline, r.t_canonical);
        out << buf << ',' << (r.blocks_agree ? "true" : "false") << '\n';
    }
}

}  // namespace csync
