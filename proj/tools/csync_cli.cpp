// csync: cluster-synchronization analysis via canonical simultaneous block
// diagonalization. One subcommand per stage; see README.md for the formats.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "csync/bench.hpp"
#include "csync/errors.hpp"
#include "csync/graph.hpp"
#include "csync/kernels.hpp"
#include "csync/partition.hpp"
#include "csync/pipeline.hpp"
#include "csync/report.hpp"
#include "csync/sensitivity.hpp"
#include "csync/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Config {
    std::string input;
    int base = 1;
    bool weighted = false;
    bool unweight = false;
    bool lcc = false;
    std::string cells;
    std::uint64_t seed = 0;
    double tol_rel = 1e-9;
    double eps_zero = 1e-8;
    double gap_tol = 1e-6;
    int max_retries = 5;
    std::size_t verify_seeds = 0;
    std::string out;
    bool error_json = false;

    std::string dynamics = "linear";
    std::vector<std::string> dyn_params;
    double t_end = 50.0;
    double dt = 0.01;
    std::size_t qr_interval = 10;
    double transient = 0.2;

    std::vector<std::string> params;
    double sens_tol = 1e-10;
    bool allow_new_edges = false;

    std::vector<std::string> bench_inputs;
    bool planted = false;
    int repeats = 3;
    bool matrices = true;
};

json config_json(const std::string& command, const Config& c) {
    json j = {{"command", command},     {"input", c.input},       {"base", c.base},
              {"weighted", c.weighted}, {"unweight", c.unweight}, {"lcc", c.lcc},
              {"cells", c.cells},       {"seed", c.seed},         {"tol_rel", c.tol_rel},
              {"eps_zero", c.eps_zero}, {"gap_tol", c.gap_tol},   {"max_retries", c.max_retries}};
    if (command == "stability" || command == "pipeline") {
        j["dynamics"] = c.dynamics;
        j["dyn_params"] = c.dyn_params;
        j["t_end"] = c.t_end;
        j["dt"] = c.dt;
        j["qr_interval"] = c.qr_interval;
        j["transient"] = c.transient;
    }
    if (command == "sensitivity") {
        j["params"] = c.params;
        j["sens_tol"] = c.sens_tol;
        j["allow_new_edges"] = c.allow_new_edges;
    }
    if (command == "bench") {
        j["bench_inputs"] = c.bench_inputs;
        j["planted"] = c.planted;
        j["repeats"] = c.repeats;
    }
    return j;
}

void check_tolerances(const Config& c) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw csync::ValidationError(std::string(name) + " must be positive");
    };
    positive(c.tol_rel, "--tol-rel");
    positive(c.eps_zero, "--eps-zero");
    positive(c.gap_tol, "--gap-tol");
    positive(c.sens_tol, "--sens-tol");
    if (c.base != 0 && c.base != 1) throw csync::ValidationError("--base must be 0 or 1");
}

csync::Network load_network(const Config& c) {
    if (c.input.empty()) throw csync::ValidationError("--input is required");
    csync::EdgeListOptions opts;
    opts.indexing_base = c.base;
    opts.weighted = c.weighted;
    opts.unweight = c.unweight;
    csync::Network net = csync::load_edge_list(fs::path(c.input), opts);
    return c.lcc ? csync::largest_connected_component(net) : net;
}

csync::Partition load_partition(const Config& c, const csync::Network& net) {
    if (c.cells.empty()) return csync::coarsest_equitable_partition(net);
    std::ifstream in(c.cells);
    if (!in) throw csync::IoError("cannot open cells file '" + c.cells + "'");
    return csync::read_cells(in, net);
}

csync::SbdOptions sbd_options(const Config& c) {
    csync::SbdOptions o;
    o.seed = c.seed;
    o.tol_rel = c.tol_rel;
    o.eps_zero_rel = c.eps_zero;
    o.gap_tol = c.gap_tol;
    o.max_retries = c.max_retries;
    return o;
}

/// Writes to <out>/<name>, or to stdout when no directory was given.
class Sink {
public:
    explicit Sink(std::string dir) : dir_(std::move(dir)) {
        if (!dir_.empty()) {
            std::error_code ec;
            fs::create_directories(dir_, ec);
            if (ec) throw csync::IoError("cannot create output directory '" + dir_ + "': " + ec.message());
        }
    }

    bool to_stdout() const { return dir_.empty(); }

    void write(const std::string& name, const std::string& content, bool echo) const {
        if (dir_.empty()) {
            if (echo) std::cout << content;
            return;
        }
        const fs::path path = fs::path(dir_) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw csync::IoError("cannot write '" + path.string() + "'");
        out << content;
        if (!out) throw csync::IoError("write failed for '" + path.string() + "'");
    }

private:
    std::string dir_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv_meta_line(const json& meta) {
    return "# csync " + meta["version"].get<std::string>() + " config_hash=" + meta["config_hash"].get<std::string>() +
           " seed=" + std::to_string(meta["seed"].get<std::uint64_t>()) + "\n";
}

json partition_report(const csync::Network& net, const csync::Partition& part, const json& meta) {
    json j = {{"meta", meta}, {"partition", csync::partition_json(net, part)}};
    const auto check = csync::check_equitable(net, part);
    j["equitable"] = check.equitable;
    if (part.cluster_count() == 1)
        j["note"] = "single cell: the analysis degenerates to plain SBD of the adjacency matrix";
    const csync::IndicatorSet ind = csync::build_indicators(net, part);
    json q = json::array();
    for (Eigen::Index r = 0; r < ind.quotient.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < ind.quotient.cols(); ++c) row.push_back(ind.quotient(r, c));
        q.push_back(std::move(row));
    }
    j["quotient"] = std::move(q);
    json spec = json::array();
    for (const auto& z : csync::quotient_spectrum(ind)) spec.push_back({z.real(), z.imag()});
    j["quotient_spectrum"] = std::move(spec);
    return j;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::ostringstream os;
    csync::write_matrix_csv(os, m);
    return os.str();
}

csync::SbdResult run_transform(const csync::Network& net, const csync::Partition& part, const Config& c) {
    return csync::run_canonical_sbd(net, part, sbd_options(c));
}

json transform_json(const csync::Network& net, const csync::SbdResult& res, const Config& c, const json& meta) {
    json j = {{"meta", meta}, {"blocks", csync::block_report(res)}, {"row_labels", json::array()}};
    for (const auto& label : net.labels()) j["row_labels"].push_back(label);
    if (c.verify_seeds > 1) {
        const auto check = csync::verify_with_seeds(net, res.partition, sbd_options(c), c.verify_seeds);
        j["seed_check"] = {{"seeds", check.seeds}, {"block_multisets", check.block_multisets},
                           {"consistent", check.consistent}};
    }
    return j;
}

void write_transform(const Sink& sink, const csync::Network& net, const csync::SbdResult& res, const Config& c,
                     const json& meta, bool echo) {
    sink.write("transform.json", dump(transform_json(net, res, c, meta)), echo);
    if (sink.to_stdout() || !c.matrices) return;
    const std::string meta_line = csv_meta_line(meta);
    sink.write("T.csv", meta_line + matrix_csv(csync::transform_in_node_order(res.transform, res.partition)), false);
    sink.write("B.csv", meta_line + matrix_csv(res.transform.b), false);
    std::ostringstream trip, tail;
    csync::write_matrix_triplets(trip, res.transform.b, res.transform.eps_zero);
    sink.write("B.triplets", meta_line + trip.str(), false);
    csync::write_spectrum_tail_csv(tail, res.basis);
    sink.write("spectrum_tail.csv", meta_line + tail.str(), false);
}

std::map<std::string, double> parse_dyn_params(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw csync::ValidationError("--dyn-param '" + item + "' is not k=v");
        const std::string value = item.substr(eq + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value.size()) throw csync::ValidationError("--dyn-param '" + item + "' has a bad value");
        out[item.substr(0, eq)] = v;
    }
    return out;
}

/// Seeded initial condition for the quotient network: entries uniform in
/// [-1, 1], shifted to (0, 0, 25) for the Lorenz preset.
Eigen::MatrixXd initial_condition(std::size_t c, const csync::DynamicsSpec& dyn, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x0(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(dyn.m));
    for (Eigen::Index k = 0; k < x0.rows(); ++k)
        for (Eigen::Index j = 0; j < x0.cols(); ++j) x0(k, j) = u(rng);
    if (dyn.name == "lorenz") x0.col(2).array() += 25.0;
    return x0;
}

std::vector<csync::BlockExponents> run_stability(const csync::SbdResult& res, const Config& c) {
    const csync::DynamicsSpec dyn = csync::make_dynamics(c.dynamics, parse_dyn_params(c.dyn_params));
    const auto traj = csync::quotient_integrate(res.indicators, dyn,
                                                initial_condition(res.indicators.cluster_count(), dyn, c.seed), c.t_end, c.dt);
    csync::ExponentOptions eo;
    eo.qr_interval = c.qr_interval;
    eo.transient_fraction = c.transient;
    std::vector<csync::BlockExponents> out;
    for (std::size_t k = 0; k < res.transform.block_count(); ++k)
        out.push_back(csync::transverse_exponents(res.transform, dyn, traj, k, eo));
    return out;
}

void write_stability(const Sink& sink, const std::vector<csync::BlockExponents>& blocks, const json& meta, bool echo) {
    std::ostringstream csv;
    csync::write_exponents_csv(csv, blocks);
    sink.write("exponents.csv", csv_meta_line(meta) + csv.str(), echo);
    json j = {{"meta", meta}, {"blocks", json::array()}};
    for (const auto& b : blocks)
        j["blocks"].push_back({{"block", b.block},
                               {"class", csync::to_string(b.block_class)},
                               {"max_exponent", b.max_exponent()},
                               {"includes_quotient", b.includes_quotient}});
    sink.write("stability.json", dump(j), false);
}

int cmd_partition(const Config& c) {
    const json meta = csync::run_meta(config_json("partition", c), c.seed);
    const csync::Network net = load_network(c);
    const csync::Partition part = load_partition(c, net);
    const Sink sink(c.out);
    sink.write("partition.json", dump(partition_report(net, part, meta)), true);
    std::ostringstream cells;
    csync::write_cells(cells, net, part);
    sink.write("partition.cells", cells.str(), false);
    return 0;
}

int cmd_transform(const Config& c) {
    const json meta = csync::run_meta(config_json("transform", c), c.seed);
    const csync::Network net = load_network(c);
    const csync::SbdResult res = run_transform(net, load_partition(c, net), c);
    write_transform(Sink(c.out), net, res, c, meta, true);
    return 0;
}

int cmd_stability(const Config& c) {
    const json meta = csync::run_meta(config_json("stability", c), c.seed);
    const csync::Network net = load_network(c);
    const csync::SbdResult res = run_transform(net, load_partition(c, net), c);
    write_stability(Sink(c.out), run_stability(res, c), meta, true);
    return 0;
}

int cmd_sensitivity(const Config& c) {
    const json meta = csync::run_meta(config_json("sensitivity", c), c.seed);
    csync::Network net = load_network(c);
    std::vector<csync::EdgeParam> params;
    for (const auto& text : c.params) params.push_back(csync::parse_edge_param(text, net));
    if (params.empty()) throw csync::ValidationError("sensitivity needs at least one --param");
    const csync::Network nominal_support = net;
    for (const auto& p : params) {
        if (nominal_support.weight(p.u, p.v) == 0.0 && !c.allow_new_edges)
            throw csync::ValidationError("parameter '" + p.name + "' refers to an edge outside the network");
        net = net.with_weight(p.u, p.v, p.value);
    }
    const csync::SbdResult res = run_transform(net, load_partition(c, net), c);
    csync::SensitivityOptions so;
    so.sens_tol = c.sens_tol;
    so.allow_new_edges = c.allow_new_edges;
    so.seed = c.seed;
    const auto rep = csync::sensitivity(net, res.partition, res.transform, params, so);
    for (const auto& w : rep.warnings) std::cerr << "csync: warning: " << w << '\n';
    const json j = {{"meta", meta}, {"blocks", csync::block_report(res)}, {"sensitivity", rep.to_json()}};
    Sink(c.out).write("sensitivity.json", dump(j), true);
    return 0;
}

int cmd_bench(const Config& c) {
    const json meta = csync::run_meta(config_json("bench", c), c.seed);
    std::vector<csync::BenchInstance> instances;
    for (const auto& spec : c.bench_inputs) {
        Config one = c;
        const auto sep = spec.find(',');
        one.input = spec.substr(0, sep);
        one.cells = sep == std::string::npos ? std::string() : spec.substr(sep + 1);
        csync::Network net = load_network(one);
        csync::Partition part = load_partition(one, net);
        instances.push_back({fs::path(one.input).stem().string(), std::move(net), std::move(part)});
    }
    if (c.planted)
        for (auto& inst : csync::desk_scale_instances(c.seed + 1)) instances.push_back(std::move(inst));

    csync::BenchOptions bo;
    bo.repeats = c.repeats;
    bo.sbd = sbd_options(c);
    bo.baseline.seed = c.seed;
    bo.baseline.eps_zero_rel = c.eps_zero;
    const auto records = csync::run_bench(instances, bo);

    std::ostringstream csv;
    csync::write_bench_csv(csv, records);
    const Sink sink(c.out);
    sink.write("bench.csv", csv.str(), true);
    json detail = {{"meta", meta},
                   {"machine",
                    {{"hardware_threads", std::thread::hardware_concurrency()},
                     {"kernel_isa", csync::kernels::isa_name(csync::kernels::active_isa())},
                     {"compiler", __VERSION__}}},
                   {"records", json::array()}};
    for (const auto& r : records)
        detail["records"].push_back({{"name", r.name},
                                     {"N", r.n},
                                     {"E", r.edges},
                                     {"canonical_unknowns", r.canonical_unknowns},
                                     {"baseline_unknowns", r.baseline_unknowns},
                                     {"baseline_iterations", r.baseline_iterations},
                                     {"blocks_canonical", r.blocks_canonical},
                                     {"blocks_baseline", r.blocks_baseline},
                                     {"blocks_agree", r.blocks_agree},
                                     {"error", r.error}});
    sink.write("bench.json", dump(detail), false);
    return 0;
}

int cmd_pipeline(const Config& c) {
    const json meta = csync::run_meta(config_json("pipeline", c), c.seed);
    const csync::Network net = load_network(c);
    const csync::Partition part = load_partition(c, net);
    const Sink sink(c.out);
    sink.write("partition.json", dump(partition_report(net, part, meta)), false);
    const csync::SbdResult res = run_transform(net, part, c);
    write_transform(sink, net, res, c, meta, false);
    const auto blocks = run_stability(res, c);
    write_stability(sink, blocks, meta, false);
    if (sink.to_stdout()) {
        json summary = {{"meta", meta}, {"blocks", csync::block_report(res)}, {"max_exponents", json::array()}};
        for (const auto& b : blocks) summary["max_exponents"].push_back(b.max_exponent());
        std::cout << dump(summary);
    }
    return 0;
}

void add_input_options(CLI::App* sub, Config& c) {
    sub->add_option("--input", c.input, "edge-list file");
    sub->add_option("--base", c.base, "node indexing base of the edge list (0 or 1)");
    sub->add_flag("--weighted", c.weighted, "read a third column as the edge weight");
    sub->add_flag("--unweight", c.unweight, "accept and ignore a third column");
    sub->add_flag("--lcc", c.lcc, "keep only the largest connected component");
    sub->add_option("--cells", c.cells, "cells file (default: coarsest equitable partition)");
}

void add_sbd_options(CLI::App* sub, Config& c) {
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--tol-rel", c.tol_rel, "nullspace threshold relative to the largest eigenvalue of S^T S");
    sub->add_option("--eps-zero", c.eps_zero, "block threshold relative to ||A||_F");
    sub->add_option("--gap-tol", c.gap_tol, "minimum relative eigenvalue gap before resampling P");
    sub->add_option("--max-retries", c.max_retries, "resampling attempts for P");
}

void add_dynamics_options(CLI::App* sub, Config& c) {
    sub->add_option("--dynamics", c.dynamics, "linear | lorenz");
    sub->add_option("--dyn-param", c.dyn_params, "dynamics parameter k=v (repeatable)");
    sub->add_option("--t-end", c.t_end, "integration horizon");
    sub->add_option("--dt", c.dt, "RK4 step");
    sub->add_option("--qr-interval", c.qr_interval, "steps between QR re-orthonormalizations");
    sub->add_option("--transient", c.transient, "fraction of the horizon discarded");
}

struct Failure {
    const char* kind;
    int code;
};

void report_error(const Config& c, const Failure& f, const std::string& message) {
    std::cerr << "csync: error: " << message << '\n';
    if (c.error_json)
        std::cout << json{{"error", {{"kind", f.kind}, {"message", message}, {"exit_code", f.code}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    Config c;
    CLI::App app{"Canonical simultaneous block diagonalization for cluster synchronization"};
    app.set_version_flag("--version", std::string("csync ") + CSYNC_VERSION);
    app.require_subcommand(1);
    app.add_flag("--error-json", c.error_json, "also print errors as JSON on stdout");
    app.add_option("--out", c.out, "output directory (default: print the main report)");

    auto* partition = app.add_subcommand("partition", "equitable partition and quotient matrix");
    add_input_options(partition, c);

    auto* transform = app.add_subcommand("transform", "canonical transformation T, B and the block report");
    add_input_options(transform, c);
    add_sbd_options(transform, c);
    transform->add_option("--verify-seeds", c.verify_seeds, "repeat with k seeds and compare the block structure");
    transform->add_flag("!--no-matrices", c.matrices, "skip the T and B dumps");

    auto* stability = app.add_subcommand("stability", "Lyapunov exponents of every block");
    add_input_options(stability, c);
    add_sbd_options(stability, c);
    add_dynamics_options(stability, c);

    auto* sens = app.add_subcommand("sensitivity", "entries of B affected by edge-weight parameters");
    add_input_options(sens, c);
    add_sbd_options(sens, c);
    sens->add_option("--param", c.params, "edge parameter name:i,j=w (repeatable)");
    sens->add_option("--sens-tol", c.sens_tol, "threshold on |dB/dq|");
    sens->add_flag("--allow-new-edges", c.allow_new_edges, "accept parameters on absent edges");

    auto* bench = app.add_subcommand("bench", "canonical versus full-commutant timing");
    add_sbd_options(bench, c);
    bench->add_option("--instance", c.bench_inputs, "edge list, optionally followed by ,cells-file (repeatable)");
    bench->add_option("--base", c.base, "node indexing base of the edge lists");
    bench->add_flag("--lcc", c.lcc, "keep only the largest connected component");
    bench->add_flag("--unweight", c.unweight, "accept and ignore a third column");
    bench->add_flag("--planted", c.planted, "add the planted N = 100, 200, 400 instances");
    bench->add_option("--repeats", c.repeats, "timed repeats per method (median reported)");

    auto* pipeline = app.add_subcommand("pipeline", "partition, transform and stability in one run");
    add_input_options(pipeline, c);
    add_sbd_options(pipeline, c);
    add_dynamics_options(pipeline, c);

    for (auto* sub : {partition, transform, stability, sens, bench, pipeline}) {
        sub->add_option("--out", c.out, "output directory (default: print the main report)");
        sub->add_flag("--error-json", c.error_json, "also print errors as JSON on stdout");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        if (c.error_json) report_error(c, {"usage", 1}, e.what());
        return 1;
    }

    try {
        check_tolerances(c);
        if (app.got_subcommand(partition)) return cmd_partition(c);
        if (app.got_subcommand(transform)) return cmd_transform(c);
        if (app.got_subcommand(stability)) return cmd_stability(c);
        if (app.got_subcommand(sens)) return cmd_sensitivity(c);
        if (app.got_subcommand(bench)) return cmd_bench(c);
        return cmd_pipeline(c);
    } catch (const csync::IoError& e) {
        report_error(c, {"io", 2}, e.what());
        return 2;
    } catch (const csync::ValidationError& e) {
        report_error(c, {"validation", 1}, e.what());
        return 1;
    } catch (const csync::NumericalError& e) {
        report_error(c, {"numerical", 1}, e.what());
        return 1;
    }
}
