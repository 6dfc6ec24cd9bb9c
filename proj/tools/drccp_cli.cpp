#include "drccp/experiments.hpp"
#include "drccp/oracle.hpp"
#include "drccp/problem_io.hpp"
#include "drccp/reformulate.hpp"
#include "drccp/solve.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace drccp;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

/// Thrown when a solve ends without an optimal point.
class SolverFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string solver;
    std::string output;
    std::string problem;
    std::string ir;
    std::string model = "binary-cvar";
    std::string format = "csv";
    std::string aggregates;
    std::string x;
    std::optional<double> eps;
    std::optional<double> delta;
    std::uint64_t seed = 1;
    int n = 10;
    int t = 5;
    int m = 4;
    int samples = 50;
    int instances = 20;
    int test_samples = 2000;
    int workers = 1;
    long max_nodes = 200000;
    double capacity = 50.0;
    double sigma = 2.0;
    double cost_cap = 8.0;
    bool saa = false;
    bool timing = false;
    std::vector<int> sample_sizes{10, 160};
    std::vector<double> deltas{0.01, 0.04, 0.07, 0.10, 0.13, 0.16, 0.19};
};

void emit(const Options& o, const std::string& text) {
    if (o.output.empty())
        std::cout << text;
    else
        write_text_file(o.output, text);
}

void log_config(const std::string& command, const nlohmann::ordered_json& cfg) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = cfg;
    std::cerr << "drccp: " << j.dump() << "\n";
}

std::unique_ptr<SolverAdapter> adapter_for(const Options& o) { return make_adapter(o.solver); }

DrccpProblem load_with_overrides(const Options& o) {
    DrccpProblem p = load_problem(o.problem);
    if (o.eps) p.risk = *o.eps;
    if (o.delta) p.ball.radius = *o.delta;
    return p;
}

bool is_transport_file(const std::string& path) { return problem_file_type(read_text_file(path)) == "TransportProblem"; }

ConeProgram build_model(const Options& o) {
    const std::string& model = o.model;
    if (model == "transport-cvar" || (model == "saa" && is_transport_file(o.problem))) {
        TransportProblem t = transport_from_text(read_text_file(o.problem));
        const double eps = o.eps.value_or(0.10);
        if (model == "saa") return build_saa_milp(t.instance, t.samples, eps).program;
        return build_transport_cvar_lp(t.instance, t.samples, eps, o.delta.value_or(0.05)).program;
    }
    DrccpProblem p = load_with_overrides(o);
    if (model == "cvar") return build_cvar_relaxation(p).program;
    if (model == "binary-cvar") return build_binary_cvar_mip(p).program;
    if (model == "saa") return build_saa_milp(p);
    if (model == "robust") return build_robust_membership(p);
    throw ValidationError("unknown model '" + model + "' (cvar, binary-cvar, saa, robust, transport-cvar)");
}

nlohmann::ordered_json common_config(const Options& o) {
    nlohmann::ordered_json c;
    c["solver"] = o.solver.empty() ? (std::getenv(kSolverEnvVar) ? std::getenv(kSolverEnvVar) : "ipm") : o.solver;
    c["output"] = o.output.empty() ? "-" : o.output;
    return c;
}

int run_generate(const Options& o, const std::string& kind) {
    auto cfg = common_config(o);
    cfg["kind"] = kind;
    cfg["seed"] = o.seed;
    cfg["samples"] = o.samples;
    if (kind == "knapsack") {
        cfg["n"] = o.n;
        cfg["t"] = o.t;
        cfg["capacity"] = o.capacity;
        cfg["eps"] = o.eps.value_or(0.10);
        cfg["delta"] = o.delta.value_or(0.01);
        log_config("generate", cfg);
        KnapsackInstance inst = generate_knapsack(o.seed, o.n, o.t, o.samples, o.capacity);
        emit(o, problem_to_text(knapsack_problem(inst, o.eps.value_or(0.10), o.delta.value_or(0.01))));
        return 0;
    }
    TransportParams params;
    params.m = o.m;
    params.n = o.n;
    params.sigma = o.sigma;
    params.cost_cap = o.cost_cap;
    cfg["m"] = o.m;
    cfg["n"] = o.n;
    cfg["sigma"] = o.sigma;
    cfg["cost_cap"] = o.cost_cap;
    log_config("generate", cfg);
    TransportData data = generate_transport_data(o.seed, params, o.samples, 0);
    emit(o, transport_to_text(TransportProblem{data.instance, data.train, data.clip_rate}));
    return 0;
}

int run_build(const Options& o) {
    auto cfg = common_config(o);
    cfg["model"] = o.model;
    cfg["problem"] = o.problem;
    if (o.eps) cfg["eps"] = *o.eps;
    if (o.delta) cfg["delta"] = *o.delta;
    log_config("build", cfg);
    emit(o, program_to_text(build_model(o)));
    return 0;
}

int run_solve(const Options& o) {
    auto cfg = common_config(o);
    if (!o.ir.empty()) {
        cfg["ir"] = o.ir;
    } else {
        cfg["model"] = o.model;
        cfg["problem"] = o.problem;
        if (o.eps) cfg["eps"] = *o.eps;
        if (o.delta) cfg["delta"] = *o.delta;
    }
    cfg["max_nodes"] = o.max_nodes;
    cfg["workers"] = o.workers;
    log_config("solve", cfg);
    if (o.ir.empty() == o.problem.empty()) throw ValidationError("solve needs exactly one of --ir or --problem");
    const ConeProgram prog = o.ir.empty() ? build_model(o) : program_from_text(read_text_file(o.ir));
    auto adapter = adapter_for(o);
    Solution sol;
    if (prog.has_integrality()) {
        BnbConfig bnb;
        bnb.max_nodes = o.max_nodes;
        bnb.workers = o.workers;
        sol = branch_and_bound(prog, *adapter, bnb);
    } else {
        sol = solve_continuous(prog, *adapter);
    }
    emit(o, solution_to_json(prog, sol));
    if (sol.status != SolveStatus::Optimal) throw SolverFailure("solve ended with status " + status_name(sol.status));
    return 0;
}

Vector parse_vector(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("--x entry '" + item + "' is not a number");
        }
    }
    return Eigen::Map<Vector>(vals.data(), static_cast<long>(vals.size()));
}

int run_oracle(const Options& o) {
    auto cfg = common_config(o);
    cfg["problem"] = o.problem;
    cfg["x"] = o.x;
    if (o.eps) cfg["eps"] = *o.eps;
    if (o.delta) cfg["delta"] = *o.delta;
    log_config("oracle", cfg);
    DrccpProblem p = load_with_overrides(o);
    require_valid(p);
    Vector x = parse_vector(o.x);
    if (x.size() != p.n_vars())
        throw ValidationError("--x has " + std::to_string(x.size()) + " entries, the problem has " + std::to_string(p.n_vars()));
    MembershipResult r = check_zd_membership(x, p);
    std::ostringstream os;
    os.precision(17);
    os << "probability " << r.estimate.probability << "\n";
    os << "lambda_star " << r.estimate.lambda_star << "\n";
    os << "member " << (r.member ? "true" : "false") << "\n";
    emit(o, os.str());
    return 0;
}

int run_study(const Options& o, const std::string& kind) {
    auto cfg = common_config(o);
    cfg["kind"] = kind;
    cfg["seed"] = o.seed;
    cfg["instances"] = o.instances;
    cfg["eps"] = o.eps.value_or(0.10);
    cfg["format"] = o.format;
    cfg["timing"] = o.timing;
    cfg["workers"] = o.workers;
    auto adapter = adapter_for(o);
    StudyReport report;
    if (kind == "knapsack") {
        KnapsackStudyConfig k;
        k.n = o.n;
        k.T = o.t;
        k.N = o.samples;
        k.eps = o.eps.value_or(0.10);
        k.delta = o.delta.value_or(0.01);
        k.instances = o.instances;
        k.seed = o.seed;
        k.capacity = o.capacity;
        k.workers = o.workers;
        cfg["n"] = k.n;
        cfg["t"] = k.T;
        cfg["samples"] = k.N;
        cfg["delta"] = k.delta;
        cfg["capacity"] = k.capacity;
        log_config("study", cfg);
        report = run_knapsack_study(k, *adapter);
    } else {
        TransportStudyConfig t;
        t.params.m = o.m;
        t.params.n = o.n;
        t.params.sigma = o.sigma;
        t.params.cost_cap = o.cost_cap;
        t.deltas = o.deltas;
        t.sample_sizes = o.sample_sizes;
        t.eps = o.eps.value_or(0.10);
        t.instances = o.instances;
        t.seed = o.seed;
        t.test_samples = o.test_samples;
        t.include_saa = o.saa;
        t.saa_max_nodes = o.max_nodes;
        t.workers = o.workers;
        cfg["m"] = t.params.m;
        cfg["n"] = t.params.n;
        cfg["deltas"] = t.deltas;
        cfg["sample_sizes"] = t.sample_sizes;
        cfg["test_samples"] = t.test_samples;
        cfg["saa"] = t.include_saa;
        cfg["max_nodes"] = t.saa_max_nodes;
        log_config("study", cfg);
        report = run_transport_study(t, *adapter);
    }
    emit(o, o.format == "json-lines" ? report_json_lines(report, o.timing) : report_rows_csv(report, o.timing));
    if (!o.aggregates.empty()) write_text_file(o.aggregates, report_aggregates_csv(report));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust chance-constrained programs: oracle, reformulations, solver, studies"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--solver", o.solver, std::string("solver adapter (default: $") + kSolverEnvVar + " or ipm)");

    auto add_out = [&](CLI::App* c) { c->add_option("-o,--output", o.output, "output file (default: stdout)"); };
    auto add_risk = [&](CLI::App* c) {
        c->add_option("--eps", o.eps, "risk level");
        c->add_option("--delta", o.delta, "Wasserstein radius");
    };

    auto* gen = app.add_subcommand("generate", "write a random instance");
    gen->require_subcommand(1);
    auto* gen_k = gen->add_subcommand("knapsack", "multidimensional knapsack problem file");
    gen_k->add_option("--n", o.n, "items")->check(CLI::PositiveNumber);
    gen_k->add_option("--t", o.t, "knapsacks")->check(CLI::PositiveNumber);
    gen_k->add_option("--samples", o.samples, "training samples")->check(CLI::PositiveNumber);
    gen_k->add_option("--capacity", o.capacity, "capacity of every knapsack");
    gen_k->add_option("--seed", o.seed, "run seed");
    add_risk(gen_k);
    add_out(gen_k);
    auto* gen_t = gen->add_subcommand("transport", "transportation instance with lognormal costs");
    gen_t->add_option("--m", o.m, "facilities")->check(CLI::PositiveNumber);
    gen_t->add_option("--n", o.n, "customers")->check(CLI::PositiveNumber);
    gen_t->add_option("--samples", o.samples, "training samples")->check(CLI::PositiveNumber);
    gen_t->add_option("--sigma", o.sigma, "standard deviation of the log-costs");
    gen_t->add_option("--cost-cap", o.cost_cap, "upper end d of the cost box");
    gen_t->add_option("--seed", o.seed, "run seed");
    add_out(gen_t);
    o.m = 4;

    auto* build = app.add_subcommand("build", "write the cone program of a model");
    build->add_option("model", o.model, "cvar | binary-cvar | saa | robust | transport-cvar")
        ->required()
        ->check(CLI::IsMember({"cvar", "binary-cvar", "saa", "robust", "transport-cvar"}));
    build->add_option("--problem", o.problem, "problem file")->required();
    add_risk(build);
    add_out(build);

    auto* solve = app.add_subcommand("solve", "solve a built program, or build and solve a problem");
    solve->add_option("--ir", o.ir, "cone program file from `build`");
    solve->add_option("--problem", o.problem, "problem file");
    solve->add_option("--model", o.model, "model to build with --problem")
        ->check(CLI::IsMember({"cvar", "binary-cvar", "saa", "robust", "transport-cvar"}));
    solve->add_option("--max-nodes", o.max_nodes, "branch-and-bound node limit")->check(CLI::PositiveNumber);
    solve->add_option("--workers", o.workers, "parallel node solves")->check(CLI::PositiveNumber);
    add_risk(solve);
    add_out(solve);

    auto* oracle = app.add_subcommand("oracle", "worst-case violation probability at a fixed x");
    oracle->add_option("--problem", o.problem, "problem file")->required();
    oracle->add_option("--x", o.x, "comma-separated decision")->required();
    add_risk(oracle);
    add_out(oracle);

    auto* study = app.add_subcommand("study", "run a study and write per-row CSV or json-lines");
    study->require_subcommand(1);
    auto add_study_common = [&](CLI::App* c) {
        c->add_option("--seed", o.seed, "first instance seed; instance s uses seed + s");
        c->add_option("--instances", o.instances, "instances")->check(CLI::PositiveNumber);
        c->add_option("--workers", o.workers, "parallel cells")->check(CLI::PositiveNumber);
        c->add_option("--format", o.format, "csv | json-lines")->check(CLI::IsMember({"csv", "json-lines"}));
        c->add_option("--aggregates", o.aggregates, "also write the aggregate CSV here");
        c->add_flag("--timing", o.timing, "record wall times (output is then not reproducible)");
        add_risk(c);
        add_out(c);
    };
    auto* st_k = study->add_subcommand("knapsack", "CVaR program against the enumerated exact optimum");
    st_k->add_option("--n", o.n, "items")->check(CLI::Range(1, 20));
    st_k->add_option("--t", o.t, "knapsacks")->check(CLI::PositiveNumber);
    st_k->add_option("--samples", o.samples, "training samples")->check(CLI::PositiveNumber);
    st_k->add_option("--capacity", o.capacity, "capacity of every knapsack");
    add_study_common(st_k);
    auto* st_t = study->add_subcommand("transport", "reliability of the DRW (and SAA) models over radius and N");
    st_t->add_option("--m", o.m, "facilities")->check(CLI::PositiveNumber);
    st_t->add_option("--n", o.n, "customers")->check(CLI::PositiveNumber);
    st_t->add_option("--samples", o.sample_sizes, "training sample sizes")->delimiter(',');
    st_t->add_option("--deltas", o.deltas, "radius grid")->delimiter(',');
    st_t->add_option("--test-samples", o.test_samples, "test samples per instance")->check(CLI::PositiveNumber);
    st_t->add_option("--sigma", o.sigma, "standard deviation of the log-costs");
    st_t->add_option("--cost-cap", o.cost_cap, "upper end d of the cost box");
    st_t->add_flag("--saa", o.saa, "also solve the sample average model");
    st_t->add_option("--max-nodes", o.max_nodes, "node limit of each sample average solve")->check(CLI::PositiveNumber);
    add_study_common(st_t);

    try {
        // Transport defaults differ from the knapsack ones; apply them before parsing.
        for (int a = 1; a < argc; ++a)
            if (std::string(argv[a]) == "transport") {
                o.n = 6;
                o.samples = 10;
                o.instances = 10;
                o.max_nodes = 400;
                break;
            }
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (gen_k->parsed()) return run_generate(o, "knapsack");
        if (gen_t->parsed()) return run_generate(o, "transport");
        if (build->parsed()) return run_build(o);
        if (solve->parsed()) return run_solve(o);
        if (oracle->parsed()) return run_oracle(o);
        if (st_k->parsed()) return run_study(o, "knapsack");
        if (st_t->parsed()) return run_study(o, "transport");
    } catch (const SolverFailure& e) {
        std::cerr << "drccp: solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const ValidationError& e) {
        std::cerr << "drccp: invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const UnsupportedError& e) {
        std::cerr << "drccp: unsupported: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "drccp: solver failure: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitValidation;
}
