// Benchmark CLI: load a matrix, build a preconditioner, run restarted GMRES,
// emit a JSON report, a convergence-history CSV and benchmark tables.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bjgmres/gmres.hpp"
#include "bjgmres/graph.hpp"
#include "bjgmres/matrix_market.hpp"
#include "bjgmres/partition.hpp"
#include "bjgmres/preconditioner.hpp"
#include "bjgmres/spmv.hpp"

using json = nlohmann::json;
using namespace bjgmres;

namespace {

struct RunSpec {
    std::string matrix_path;
    std::string rhs_mode = "axones";  // ones | axones | random:SEED | file:PATH
    std::string precond = "block-jacobi";
    index_t blocks = 16;
    index_t restart_m = 50;
    double tol = 1e-8;
    index_t max_restarts = 40;
    std::string precision = "double";  // double | hybrid
    double eps_pivot = 1e-10;
    int neumann_order = 0;
    std::string partition_file;
    bool absolute_tol = false;
    bool ritz = false;
    std::string report_path;
    std::string history_path;
};

struct RunResult {
    std::string matrix_name;
    index_t n = 0;
    index_t nnz = 0;
    double setup_ms = 0.0;
    double solve_ms = 0.0;
    SolveReport report;
    std::vector<double> x;
    std::vector<PreconditionerStats> block_stats;
};

std::string matrix_name_of(const std::string& path) {
    std::string name = path;
    const size_t slash = name.find_last_of("/\\");
    if (slash != std::string::npos) name = name.substr(slash + 1);
    const size_t dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    return name;
}

/// SplitMix64 in [-1, 1): reproducible across platforms and runs.
std::vector<double> seeded_rhs(index_t n, std::uint64_t seed) {
    std::vector<double> b(n);
    std::uint64_t state = seed;
    for (double& v : b) {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        v = static_cast<double>(z >> 11) * 0x1p-53 * 2.0 - 1.0;
    }
    return b;
}

std::vector<double> make_rhs(const RunSpec& spec, const SparseMatrix& a) {
    const index_t n = a.rows();
    if (spec.rhs_mode == "ones") return std::vector<double>(n, 1.0);
    if (spec.rhs_mode == "axones")
        return spmv<double>(a, std::vector<double>(n, 1.0));
    if (spec.rhs_mode.rfind("random:", 0) == 0) {
        const std::uint64_t seed = std::stoull(spec.rhs_mode.substr(7));
        return seeded_rhs(n, seed);
    }
    if (spec.rhs_mode.rfind("file:", 0) == 0) {
        const std::string path = spec.rhs_mode.substr(5);
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open rhs file: " + path);
        std::vector<double> b;
        double v;
        while (in >> v) b.push_back(v);
        if (static_cast<index_t>(b.size()) != n)
            throw std::runtime_error("rhs file length " + std::to_string(b.size()) +
                                     " does not match matrix dimension " +
                                     std::to_string(n));
        return b;
    }
    throw std::runtime_error("unknown rhs mode: " + spec.rhs_mode);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

RunResult run_spec(const RunSpec& spec) {
    RunResult out;
    out.matrix_name = matrix_name_of(spec.matrix_path);

    SparseMatrix a = read_matrix_market_file(spec.matrix_path);
    if (a.rows() != a.cols())
        throw std::runtime_error("matrix must be square, got " +
                                 std::to_string(a.rows()) + "x" +
                                 std::to_string(a.cols()));
    out.n = a.rows();
    out.nnz = a.nnz();

    const bool hybrid = spec.precision == "hybrid";
    const auto t_setup = std::chrono::steady_clock::now();
    if (hybrid) a.materialize_low();

    Preconditioner p = Preconditioner::identity(a.rows());
    if (spec.precond == "ilu0") {
        p = Preconditioner::from_ilu0(a);
    } else if (spec.precond == "block-jacobi") {
        Partition part;
        if (!spec.partition_file.empty()) {
            std::ifstream in(spec.partition_file);
            if (!in)
                throw std::runtime_error("cannot open partition file: " +
                                         spec.partition_file);
            part = import_partition(in, a.rows(), spec.blocks);
        } else {
            part = partition_graph(graph_from_matrix(a), spec.blocks, 0.1);
        }
        BlockJacobiOptions opts;
        opts.eps_pivot = spec.eps_pivot;
        opts.neumann_order = spec.neumann_order;
        opts.policy.mode = hybrid ? PrecisionMode::Hybrid : PrecisionMode::DoubleOnly;
        p = Preconditioner::block_jacobi(a, std::move(part), opts);
        out.block_stats = p.block_jacobi_data()->stats;
    } else if (spec.precond != "none") {
        throw std::runtime_error("unknown preconditioner: " + spec.precond);
    }
    out.setup_ms = ms_since(t_setup);

    const std::vector<double> b = make_rhs(spec, a);
    GmresConfig cfg;
    cfg.restart_m = spec.restart_m;
    cfg.tol = spec.tol;
    cfg.max_restarts = spec.max_restarts;
    cfg.absolute_tol = spec.absolute_tol;
    cfg.policy.mode = hybrid ? PrecisionMode::Hybrid : PrecisionMode::DoubleOnly;
    cfg.collect_ritz = spec.ritz;

    const auto t_solve = std::chrono::steady_clock::now();
    SolveResult sr = hybrid_restart_gmres(a, p, b, cfg);
    out.solve_ms = ms_since(t_solve);
    out.report = std::move(sr.report);
    out.x = std::move(sr.x);
    return out;
}

json config_json(const RunSpec& spec) {
    json cfg;
    cfg["matrix"] = spec.matrix_path;
    cfg["rhs"] = spec.rhs_mode;
    cfg["precond"] = spec.precond;
    cfg["blocks"] = spec.blocks;
    cfg["restart"] = spec.restart_m;
    cfg["tol"] = spec.tol;
    cfg["max_restarts"] = spec.max_restarts;
    cfg["precision"] = spec.precision;
    cfg["eps_pivot"] = spec.eps_pivot;
    cfg["neumann_order"] = spec.neumann_order;
    cfg["partition_file"] =
        spec.partition_file.empty() ? json(nullptr) : json(spec.partition_file);
    cfg["absolute_tol"] = spec.absolute_tol;
    cfg["ritz"] = spec.ritz;
    return cfg;
}

json report_json(const RunSpec& spec, const RunResult& r) {
    json doc;
    doc["matrix"] = {{"name", r.matrix_name}, {"n", r.n}, {"nnz", r.nnz}};
    doc["config"] = config_json(spec);
    doc["result"] = {{"converged", r.report.converged},
                     {"iterations", r.report.total_iterations},
                     {"restarts", r.report.restarts},
                     {"final_residual", r.report.final_residual},
                     {"setup_ms", r.setup_ms},
                     {"solve_ms", r.solve_ms}};
    json blocks = json::array();
    for (const PreconditionerStats& st : r.block_stats)
        blocks.push_back({{"dim", st.block_dim},
                          {"nnz", st.block_nnz},
                          {"perturbations", st.perturbation_count},
                          {"cond_estimate", st.cond_estimate},
                          {"error_bound", st.error_bound}});
    doc["preconditioner"] = {{"blocks", blocks}};
    if (spec.ritz) {
        json rz = json::array();
        for (const auto& v : r.report.ritz)
            rz.push_back({v.real(), v.imag()});
        doc["ritz"] = rz;
    }
    return doc;
}

void write_history_csv(const std::string& path, const SolveReport& rep) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open history file: " + path);
    out << "restart_cycle,global_iteration,relative_residual\n";
    char buf[64];
    for (const HistoryPoint& h : rep.residual_history) {
        std::snprintf(buf, sizeof buf, "%.17g", h.relative_residual);
        out << h.cycle << "," << h.iteration << "," << buf << "\n";
    }
}

void print_summary(const RunResult& r) {
    std::printf("%s: n=%lld nnz=%lld\n", r.matrix_name.c_str(),
                static_cast<long long>(r.n), static_cast<long long>(r.nnz));
    std::printf("  converged=%s iterations=%lld restarts=%lld final_residual=%.3e\n",
                r.report.converged ? "true" : "false",
                static_cast<long long>(r.report.total_iterations),
                static_cast<long long>(r.report.restarts),
                r.report.final_residual);
    std::printf("  setup=%.2f ms  solve=%.2f ms\n", r.setup_ms, r.solve_ms);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RunSpec spec_from_json(const json& j) {
    RunSpec s;
    s.matrix_path = j.at("matrix").get<std::string>();
    s.rhs_mode = j.value("rhs", s.rhs_mode);
    s.precond = j.value("precond", s.precond);
    s.blocks = j.value("blocks", s.blocks);
    s.restart_m = j.value("restart", s.restart_m);
    s.tol = j.value("tol", s.tol);
    s.max_restarts = j.value("max_restarts", s.max_restarts);
    s.precision = j.value("precision", s.precision);
    s.eps_pivot = j.value("eps_pivot", s.eps_pivot);
    s.neumann_order = j.value("neumann_order", s.neumann_order);
    s.partition_file = j.value("partition_file", s.partition_file);
    s.absolute_tol = j.value("absolute_tol", s.absolute_tol);
    return s;
}

struct BenchRow {
    std::string matrix_name;
    index_t n = 0;
    index_t nnz = 0;
    double setup_ms = 0.0;
    double solve_ms = 0.0;
    index_t iterations = 0;
    bool converged = false;
    double final_residual = 0.0;
};

int cmd_bench(const std::string& specs_path, int repetitions,
              const std::string& out_csv) {
    std::ifstream in(specs_path);
    if (!in) {
        std::cerr << "error: cannot open specs file: " << specs_path << "\n";
        return 1;
    }
    json specs = json::parse(in);
    if (!specs.is_array() || specs.empty()) {
        std::cerr << "error: specs file must hold a non-empty JSON array\n";
        return 1;
    }

    std::vector<BenchRow> rows;
    for (const json& j : specs) {
        RunSpec spec;
        try {
            spec = spec_from_json(j);
            std::vector<double> setup_times, solve_times;
            RunResult last;
            for (int rep = 0; rep < repetitions; ++rep) {
                last = run_spec(spec);
                setup_times.push_back(last.setup_ms);
                solve_times.push_back(last.solve_ms);
            }
            BenchRow row;
            row.matrix_name = last.matrix_name;
            row.n = last.n;
            row.nnz = last.nnz;
            row.setup_ms = median(setup_times);
            row.solve_ms = median(solve_times);
            row.iterations = last.report.total_iterations;
            row.converged = last.report.converged;
            row.final_residual = last.report.final_residual;
            rows.push_back(row);
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping spec (" << e.what() << ")\n";
        }
    }
    if (rows.empty()) {
        std::cerr << "error: every spec failed\n";
        return 1;
    }

    std::printf("%-16s %8s %9s %8s %12s %11s %6s %5s %13s\n", "matrix", "n",
                "nnz", "nnz/row", "setup(ms)", "solve(ms)", "iter", "conv",
                "residual");
    for (const BenchRow& r : rows)
        std::printf("%-16s %8lld %9lld %8.2f %12.2f %11.2f %6lld %5s %13.3e\n",
                    r.matrix_name.c_str(), static_cast<long long>(r.n),
                    static_cast<long long>(r.nnz),
                    static_cast<double>(r.nnz) / static_cast<double>(r.n),
                    r.setup_ms, r.solve_ms, static_cast<long long>(r.iterations),
                    r.converged ? "yes" : "no", r.final_residual);

    if (!out_csv.empty()) {
        std::ofstream csv(out_csv);
        if (!csv) {
            std::cerr << "error: cannot open " << out_csv << "\n";
            return 1;
        }
        csv << "matrix_name,n,nnz,nnz_per_row,precond_setup_ms,solve_ms,"
               "iterations,converged,final_residual\n";
        char buf[96];
        for (const BenchRow& r : rows) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f",
                          static_cast<double>(r.nnz) / static_cast<double>(r.n),
                          r.setup_ms, r.solve_ms);
            csv << r.matrix_name << "," << r.n << "," << r.nnz << "," << buf << ","
                << r.iterations << "," << (r.converged ? "true" : "false") << ",";
            std::snprintf(buf, sizeof buf, "%.17g", r.final_residual);
            csv << buf << "\n";
        }
    }
    return 0;
}

int cmd_partition_run(const std::string& matrix_path, index_t s,
                      const std::string& out_path) {
    const SparseMatrix a = read_matrix_market_file(matrix_path);
    if (a.rows() != a.cols())
        throw std::runtime_error("matrix must be square");
    const WeightedGraph g = graph_from_matrix(a);
    Partition p = partition_graph(g, s, 0.1);
    measure_block_nnz(p, a);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    export_partition(out, p);
    std::printf("blocks=%lld cut_weight=%.6g nnz_imbalance=%.4f\n",
                static_cast<long long>(s), cut_weight(g, p), p.imbalance);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse restarted-GMRES benchmark harness"};
    app.require_subcommand(1);

    RunSpec spec;
    CLI::App* solve = app.add_subcommand("solve", "solve one linear system");
    solve->add_option("--matrix", spec.matrix_path, "Matrix Market file")
        ->required();
    solve->add_option("--rhs", spec.rhs_mode,
                      "ones | axones | random:SEED | file:PATH");
    solve->add_option("--precond", spec.precond, "none | ilu0 | block-jacobi");
    auto* blocks_opt = solve->add_option("--blocks", spec.blocks, "block count");
    solve->add_option("--restart", spec.restart_m, "restart dimension m");
    solve->add_option("--tol", spec.tol, "relative residual tolerance");
    solve->add_option("--max-restarts", spec.max_restarts, "restart cycle cap");
    solve->add_option("--precision", spec.precision, "double | hybrid");
    auto* eps_opt = solve->add_option("--eps-pivot", spec.eps_pivot,
                                      "pivot regularization threshold");
    auto* neu_opt = solve->add_option("--neumann-order", spec.neumann_order,
                                      "truncated series order (0 = direct)");
    auto* part_opt = solve->add_option("--partition-file", spec.partition_file,
                                       "import a partition instead of building one");
    solve->add_flag("--absolute-tol", spec.absolute_tol,
                    "interpret --tol as an absolute residual bound");
    solve->add_option("--report", spec.report_path, "JSON report path");
    solve->add_option("--history", spec.history_path, "convergence CSV path");
    solve->add_flag("--ritz", spec.ritz, "collect Ritz values");

    std::string bench_specs, bench_csv;
    int repetitions = 1;
    CLI::App* bench = app.add_subcommand("bench", "run a table of solver specs");
    bench->add_option("--specs", bench_specs, "JSON array of run specs")
        ->required();
    bench->add_option("--repetitions", repetitions, "timing repetitions")
        ->check(CLI::PositiveNumber);
    bench->add_option("--out", bench_csv, "CSV output path");

    std::string pm_matrix, pm_out;
    index_t pm_blocks = 0;
    CLI::App* part = app.add_subcommand("partition", "write a partition file");
    part->add_option("--matrix", pm_matrix, "Matrix Market file")->required();
    part->add_option("--blocks", pm_blocks, "block count")->required();
    part->add_option("--out", pm_out, "partition file path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            if (spec.precond != "block-jacobi") {
                const char* offending = nullptr;
                if (blocks_opt->count() > 0) offending = "--blocks";
                if (part_opt->count() > 0) offending = "--partition-file";
                if (neu_opt->count() > 0) offending = "--neumann-order";
                if (eps_opt->count() > 0) offending = "--eps-pivot";
                if (offending) {
                    std::cerr << "error: " << offending << " requires --precond block-jacobi\n";
                    return 1;
                }
            }
            if (spec.precision != "double" && spec.precision != "hybrid") {
                std::cerr << "error: unknown precision: " << spec.precision << "\n";
                return 1;
            }
            if (spec.blocks < 1 || spec.restart_m < 1 || spec.max_restarts < 1 ||
                spec.tol <= 0.0) {
                std::cerr << "error: numeric flags out of range\n";
                return 1;
            }
            const RunResult r = run_spec(spec);
            if (!spec.report_path.empty()) {
                std::ofstream out(spec.report_path);
                if (!out)
                    throw std::runtime_error("cannot open report file: " +
                                             spec.report_path);
                out << report_json(spec, r).dump(2) << "\n";
            }
            if (!spec.history_path.empty())
                write_history_csv(spec.history_path, r.report);
            print_summary(r);
            return r.report.converged ? 0 : 2;
        }
        if (bench->parsed()) return cmd_bench(bench_specs, repetitions, bench_csv);
        if (part->parsed()) {
            if (pm_blocks < 1) {
                std::cerr << "error: --blocks must be >= 1\n";
                return 1;
            }
            return cmd_partition_run(pm_matrix, pm_blocks, pm_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
