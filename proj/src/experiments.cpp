#include "drccp/experiments.hpp"

#include "drccp/oracle.hpp"
#include "drccp/reformulate.hpp"
#include "json_util.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace drccp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::mt19937_64 rng_stream(std::uint64_t seed, const std::string& name) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : name) h = (h ^ c) * 1099511628211ULL;
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ h));
}

Matrix random_correlation(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix G(dim, dim);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r) G(r, c) = normal(rng);
    Matrix S = G * G.transpose();
    Vector scale = S.diagonal().cwiseSqrt().cwiseInverse();
    Matrix C = scale.asDiagonal() * S * scale.asDiagonal();
    C = (0.5 * (C + C.transpose())).eval();
    C.diagonal().setOnes();
    return C;
}

TransportInstance generate_transport(std::uint64_t seed, const TransportParams& params) {
    if (params.m < 1 || params.n < 1 || params.sigma < 0.0 || params.cost_cap <= 0.0)
        throw ValidationError("transport parameters: need m, n >= 1, sigma >= 0 and a positive cost cap");
    TransportInstance inst;
    inst.m = params.m;
    inst.n = params.n;
    inst.L_low = params.L_low;
    inst.L_high = params.L_high;
    inst.seed = seed;
    const int R = inst.arcs();
    inst.d = Vector::Constant(R, params.cost_cap);
    auto rng = rng_stream(seed, "instance");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    inst.mu.resize(R);
    for (int r = 0; r < R; ++r) inst.mu(r) = unit(rng);
    // A Gram matrix is PSD by construction; redraw only if rounding broke that.
    for (int attempt = 0; attempt < 8; ++attempt) {
        Matrix C = random_correlation(R, rng);
        inst.Sigma = params.sigma * params.sigma * C;
        Eigen::SelfAdjointEigenSolver<Matrix> es(inst.Sigma, Eigen::EigenvaluesOnly);
        if (es.eigenvalues()(0) >= -1e-10 * std::max(1.0, params.sigma * params.sigma)) break;
        if (attempt == 7) throw Error("generate_transport: covariance is not PSD");
    }
    validate_transport(inst);
    return inst;
}

std::vector<Vector> draw_transport_costs(const TransportInstance& inst, int count, std::mt19937_64& rng, long* clipped) {
    const int R = inst.arcs();
    Eigen::SelfAdjointEigenSolver<Matrix> es(inst.Sigma);
    Matrix F = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Vector> out;
    out.reserve(static_cast<size_t>(count));
    long n_clipped = 0;
    for (int s = 0; s < count; ++s) {
        Vector g(R);
        for (int r = 0; r < R; ++r) g(r) = normal(rng);
        Vector xi = (inst.mu + F * g).array().exp();
        for (int r = 0; r < R; ++r)
            if (xi(r) > inst.d(r)) {
                xi(r) = inst.d(r);
                ++n_clipped;
            }
        out.push_back(std::move(xi));
    }
    if (clipped) *clipped += n_clipped;
    return out;
}

TransportData generate_transport_data(std::uint64_t seed, const TransportParams& params, int n_train, int n_test) {
    TransportData data;
    data.instance = generate_transport(seed, params);
    long clipped = 0;
    auto train_rng = rng_stream(seed, "samples");
    data.train = draw_transport_costs(data.instance, n_train, train_rng, &clipped);
    auto test_rng = rng_stream(seed, "test-samples");
    data.test = draw_transport_costs(data.instance, n_test, test_rng, &clipped);
    const long entries = static_cast<long>(n_train + n_test) * data.instance.arcs();
    data.clip_rate = entries > 0 ? static_cast<double>(clipped) / static_cast<double>(entries) : 0.0;
    return data;
}

namespace {

TransportDecision read_decision(const Vector& primal, const std::vector<int>& a, const std::vector<int>& b, int z) {
    TransportDecision d;
    d.a.resize(static_cast<long>(a.size()));
    d.b.resize(static_cast<long>(b.size()));
    for (size_t k = 0; k < a.size(); ++k) d.a(static_cast<long>(k)) = primal(a[k]);
    for (size_t j = 0; j < b.size(); ++j) d.b(static_cast<long>(j)) = primal(b[j]);
    d.z = primal(z);
    return d;
}

}  // namespace

TransportSolve solve_transport_drw(const TransportInstance& inst, const std::vector<Vector>& train, double eps,
                                   double delta, const SolverAdapter& adapter) {
    TransportCvarProgram built = build_transport_cvar_lp(inst, train, eps, delta);
    TransportSolve out;
    out.solution = solve_continuous(built.program, adapter);
    out.usable = out.solution.status == SolveStatus::Optimal;
    if (out.usable) out.decision = read_decision(out.solution.primal, built.layout.a, built.layout.b, built.layout.z);
    return out;
}

TransportSolve solve_transport_saa(const TransportInstance& inst, const std::vector<Vector>& train, double eps,
                                   const SolverAdapter& adapter, long max_nodes) {
    TransportSaaProgram built = build_saa_milp(inst, train, eps);
    const auto& L = built.layout;
    const int N = static_cast<int>(train.size());
    const int keep = static_cast<int>(std::ceil(N * (1.0 - eps) - 1e-9));
    const ConeProgram relaxed = built.program.relaxed();

    // Greedy incumbent: drop, one at a time, the kept sample whose cost is largest.
    std::vector<char> active(static_cast<size_t>(N), 1);
    std::optional<Vector> incumbent;
    int solves = 0;
    for (int dropped = 0;; ++dropped) {
        std::vector<std::pair<int, double>> fixes;
        for (int i = 0; i < N; ++i) fixes.emplace_back(L.s[static_cast<size_t>(i)], active[static_cast<size_t>(i)] ? 1.0 : 0.0);
        Solution s = solve_continuous(fix_variables(relaxed, fixes), adapter);
        ++solves;
        if (s.status != SolveStatus::Optimal) break;
        incumbent = s.primal;
        if (dropped >= N - keep) break;
        TransportDecision d = read_decision(s.primal, L.a, L.b, L.z);
        int worst = -1;
        double worst_cost = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i) {
            if (!active[static_cast<size_t>(i)]) continue;
            const double c = transport_cost(inst, train[static_cast<size_t>(i)], d.a, d.b);
            if (c > worst_cost) {
                worst_cost = c;
                worst = i;
            }
        }
        active[static_cast<size_t>(worst)] = 0;
    }

    BnbConfig cfg;
    cfg.max_nodes = max_nodes;
    cfg.initial_incumbent = incumbent;
    TransportSolve out;
    out.solution = branch_and_bound(built.program, adapter, cfg);
    out.solution.stats.iterations += solves;
    const bool has_point = out.solution.status == SolveStatus::Optimal ||
                           (out.solution.status == SolveStatus::NodeLimit && !out.solution.stats.incumbent_trace.empty());
    out.usable = has_point;
    if (has_point) out.decision = read_decision(out.solution.primal, L.a, L.b, L.z);
    return out;
}

KnapsackInstance generate_knapsack(std::uint64_t seed, int n, int T, int N, double capacity) {
    if (n < 1 || T < 1 || N < 1) throw ValidationError("knapsack: n, T and N must be positive");
    if (!(capacity > 0.0)) throw ValidationError("knapsack: capacity must be positive");
    KnapsackInstance inst;
    inst.n = n;
    inst.T = T;
    inst.seed = seed;
    std::uniform_real_distribution<double> box(1.0, 10.0);
    auto irng = rng_stream(seed, "instance");
    inst.values.resize(n);
    for (int j = 0; j < n; ++j) inst.values(j) = box(irng);
    inst.capacities = Vector::Constant(T, capacity);
    auto srng = rng_stream(seed, "samples");
    for (int i = 0; i < N; ++i) {
        Vector s(n * T);
        for (int k = 0; k < n * T; ++k) s(k) = box(srng);
        inst.samples.push_back(std::move(s));
    }
    return inst;
}

DrccpProblem knapsack_problem(const KnapsackInstance& inst, double eps, double delta) {
    const int n = inst.n, T = inst.T, m = n * T;
    DrccpProblem p;
    p.objective = inst.values;
    p.sense = Sense::Maximize;
    p.domain.kind = Domain::Kind::Binary;
    p.risk = eps;
    p.ball.radius = delta;
    p.ball.norm = GroundNorm::L2;
    p.ball.center.dim = m;
    p.ball.center.samples = inst.samples;
    p.support = FullSpace{m};
    for (int t = 0; t < T; ++t) {
        AffineBoth f;
        f.A = Matrix::Zero(m, n);
        for (int j = 0; j < n; ++j) f.A(t * n + j, j) = -1.0;
        f.a = Vector::Zero(m);
        f.b = Vector::Zero(n);
        f.h = inst.capacities(t);
        p.constraints.emplace_back(std::move(f));
    }
    return p;
}

double estimate_reliability(const DrccpProblem& p, const Vector& x, const std::vector<Vector>& test) {
    if (test.empty()) throw ValidationError("estimate_reliability: no test samples");
    long ok = 0;
    for (const auto& xi : test) {
        bool all = true;
        for (const auto& f : p.constraints)
            if (evaluate_constraint(f, x, xi) < 0.0) {
                all = false;
                break;
            }
        ok += all ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(test.size());
}

double estimate_reliability(const TransportInstance& inst, const TransportDecision& decision,
                            const std::vector<Vector>& test) {
    if (test.empty()) throw ValidationError("estimate_reliability: no test samples");
    // Solver output carries ~1e-8 noise; a sample counts when its cost is within 1e-7 of z.
    const double slack = 1e-7 * std::max(1.0, std::abs(decision.z));
    long ok = 0;
    for (const auto& xi : test)
        if (transport_cost(inst, xi, decision.a, decision.b) <= decision.z + slack) ++ok;
    return static_cast<double>(ok) / static_cast<double>(test.size());
}

namespace {

bool domain_admits(const Domain& d, const Vector& x) {
    const long n = x.size();
    for (long j = 0; j < n; ++j) {
        if (d.lower.size() == n && x(j) < d.lower(j) - 1e-12) return false;
        if (d.upper.size() == n && x(j) > d.upper(j) + 1e-12) return false;
    }
    if (d.ineq_rows.rows() > 0 && ((d.ineq_rows * x - d.ineq_rhs).array() > 1e-9).any()) return false;
    if (d.eq_rows.rows() > 0 && ((d.eq_rows * x - d.eq_rhs).cwiseAbs().array() > 1e-9).any()) return false;
    return true;
}

}  // namespace

EnumerationResult enumerate_binary_optimum(const DrccpProblem& p) {
    const int n = p.n_vars();
    if (n > 20) throw ValidationError("enumeration refused for n = " + std::to_string(n) + " > 20");
    require_valid(p);
    EnumerationResult best;
    const double sign = p.sense == Sense::Maximize ? -1.0 : 1.0;
    Vector x(n);
    for (unsigned long k = 0; k < (1UL << n); ++k) {
        for (int j = 0; j < n; ++j) x(j) = (k >> j) & 1UL ? 1.0 : 0.0;
        if (!domain_admits(p.domain, x)) continue;
        const double value = p.objective.dot(x);
        // Candidates that cannot improve skip the oracle.
        if (best.feasible && !(sign * value < sign * best.objective)) continue;
        ++best.evaluated;
        if (!check_zd_membership(x, p).member) continue;
        best.feasible = true;
        best.x = x;
        best.objective = value;
    }
    return best;
}

double gap_metric(double value, double optimum) { return std::abs(value - optimum) / optimum; }

double improvement_metric(double lb_approx, double lb_exact) { return (lb_approx - lb_exact) / lb_exact; }

Aggregate aggregate(std::vector<double> values) {
    Aggregate a;
    a.count = static_cast<int>(values.size());
    if (values.empty()) {
        a.mean = a.q20 = a.q80 = std::numeric_limits<double>::quiet_NaN();
        return a;
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const size_t lo = static_cast<size_t>(std::floor(pos));
        const size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    a.q20 = quantile(0.2);
    a.q80 = quantile(0.8);
    return a;
}

namespace {

std::string delta_label(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", d);
    return buf;
}

}  // namespace

StudyReport run_transport_study(const TransportStudyConfig& cfg, const SolverAdapter& adapter) {
    if (cfg.instances < 1 || cfg.sample_sizes.empty() || cfg.test_samples < 1)
        throw ValidationError("transport study: need instances, sample sizes and test samples");
    for (int N : cfg.sample_sizes)
        if (N < 1) throw ValidationError("transport study: sample sizes must be positive");
    const int max_n = *std::max_element(cfg.sample_sizes.begin(), cfg.sample_sizes.end());

    // Data per instance; smaller sample sizes use prefixes of the largest draw.
    std::vector<TransportData> data(static_cast<size_t>(cfg.instances));
    parallel_for(cfg.instances, cfg.workers, [&](int s) {
        data[static_cast<size_t>(s)] =
            generate_transport_data(cfg.seed + static_cast<std::uint64_t>(s), cfg.params, max_n, cfg.test_samples);
    });

    struct Cell {
        int instance;
        int N;
        double delta;
        bool saa;
    };
    std::vector<Cell> cells;
    for (int s = 0; s < cfg.instances; ++s)
        for (int N : cfg.sample_sizes) {
            for (double d : cfg.deltas) cells.push_back({s, N, d, false});
            if (cfg.include_saa) cells.push_back({s, N, 0.0, true});
        }

    StudyReport report;
    report.kind = "transport";
    report.rows.resize(cells.size());
    parallel_for(static_cast<int>(cells.size()), cfg.workers, [&](int c) {
        const Cell& cell = cells[static_cast<size_t>(c)];
        const TransportData& td = data[static_cast<size_t>(cell.instance)];
        std::vector<Vector> train(td.train.begin(), td.train.begin() + cell.N);
        StudyRow row;
        row.seed = td.instance.seed;
        row.delta = cell.delta;
        row.n_samples = cell.N;
        row.model = cell.saa ? "SAA" : "DRW";
        const auto start = std::chrono::steady_clock::now();
        TransportSolve sol = cell.saa ? solve_transport_saa(td.instance, train, cfg.eps, adapter, cfg.saa_max_nodes)
                                      : solve_transport_drw(td.instance, train, cfg.eps, cell.delta, adapter);
        row.wall_ms = elapsed_ms(start);
        row.status = status_name(sol.solution.status);
        if (sol.usable) {
            row.objective = sol.decision.z;
            row.reliability = estimate_reliability(td.instance, sol.decision, td.test);
        } else {
            row.objective = row.reliability = std::numeric_limits<double>::quiet_NaN();
        }
        report.rows[static_cast<size_t>(c)] = row;
    });

    std::map<std::string, std::vector<double>> cells_by_label;
    std::vector<std::string> order;
    for (const auto& row : report.rows) {
        const std::string label = row.model == "SAA" ? "SAA,N=" + std::to_string(row.n_samples)
                                                     : "DRW,N=" + std::to_string(row.n_samples) + ",delta=" + delta_label(row.delta);
        if (!cells_by_label.count(label)) order.push_back(label);
        auto& bucket = cells_by_label[label];
        if (!std::isnan(row.reliability)) bucket.push_back(row.reliability);
    }
    for (const auto& label : order) report.aggregates.emplace_back(label, aggregate(cells_by_label[label]));

    double clip = 0.0;
    for (const auto& td : data) clip += td.clip_rate;
    report.notes.push_back("aggregates are over reliability; cells whose solve failed are excluded");
    report.notes.push_back("lognormal costs clipped to [0, d]; mean clip rate " + fmt(clip / cfg.instances));
    report.notes.push_back("test samples per instance: " + std::to_string(cfg.test_samples));
    return report;
}

StudyReport run_knapsack_study(const KnapsackStudyConfig& cfg, const SolverAdapter& adapter) {
    if (cfg.instances < 1) throw ValidationError("knapsack study: need at least one instance");
    if (cfg.n > 20) throw ValidationError("knapsack study: enumeration refused for n = " + std::to_string(cfg.n) + " > 20");
    StudyReport report;
    report.kind = "knapsack";
    report.rows.resize(static_cast<size_t>(2 * cfg.instances));
    constexpr int kTestSamples = 2000;
    parallel_for(cfg.instances, cfg.workers, [&](int s) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
        KnapsackInstance inst = generate_knapsack(seed, cfg.n, cfg.T, cfg.N, cfg.capacity);
        DrccpProblem p = knapsack_problem(inst, cfg.eps, cfg.delta);
        auto test_rng = rng_stream(seed, "test-samples");
        std::uniform_real_distribution<double> box(1.0, 10.0);
        std::vector<Vector> test;
        for (int k = 0; k < kTestSamples; ++k) {
            Vector xi(cfg.n * cfg.T);
            for (long r = 0; r < xi.size(); ++r) xi(r) = box(test_rng);
            test.push_back(std::move(xi));
        }

        StudyRow exact;
        exact.seed = seed;
        exact.delta = cfg.delta;
        exact.n_samples = cfg.N;
        exact.model = "Exact";
        auto start = std::chrono::steady_clock::now();
        EnumerationResult e = enumerate_binary_optimum(p);
        exact.wall_ms = elapsed_ms(start);
        exact.status = e.feasible ? "Optimal" : "Infeasible";
        exact.objective = exact.opt_val = e.objective;
        exact.reliability = e.feasible ? estimate_reliability(p, e.x, test) : std::numeric_limits<double>::quiet_NaN();

        StudyRow cvar = exact;
        cvar.model = "CVaR";
        start = std::chrono::steady_clock::now();
        BinaryCvarProgram built = build_binary_cvar_mip(p);
        Solution sol = branch_and_bound(built.program, adapter);
        cvar.wall_ms = elapsed_ms(start);
        cvar.status = status_name(sol.status);
        if (sol.status == SolveStatus::Optimal) {
            Vector x(cfg.n);
            for (int j = 0; j < cfg.n; ++j) x(j) = sol.primal(built.layout.x[static_cast<size_t>(j)]);
            cvar.objective = sol.objective_value;
            cvar.reliability = estimate_reliability(p, x, test);
            cvar.gap = gap_metric(cvar.objective, e.objective);
        } else {
            cvar.objective = cvar.reliability = cvar.gap = std::numeric_limits<double>::quiet_NaN();
        }
        report.rows[static_cast<size_t>(2 * s)] = exact;
        report.rows[static_cast<size_t>(2 * s + 1)] = cvar;
    });

    std::vector<double> gaps, rel_exact, rel_cvar;
    for (const auto& row : report.rows) {
        if (row.model == "CVaR") {
            if (!std::isnan(row.gap)) gaps.push_back(row.gap);
            if (!std::isnan(row.reliability)) rel_cvar.push_back(row.reliability);
        } else if (!std::isnan(row.reliability)) {
            rel_exact.push_back(row.reliability);
        }
    }
    report.aggregates.emplace_back("CVaR,gap", aggregate(gaps));
    report.aggregates.emplace_back("CVaR,reliability", aggregate(rel_cvar));
    report.aggregates.emplace_back("Exact,reliability", aggregate(rel_exact));
    report.notes.push_back(
        "exact baseline: every x in {0,1}^n checked with the exact worst-case violation probability; "
        "the best member is the optimum");
    report.notes.push_back("gap = |value - opt_val| / opt_val; reliability over " + std::to_string(kTestSamples) +
                           " uniform test samples");
    return report;
}

std::string report_rows_csv(const StudyReport& r, bool with_time) {
    std::ostringstream os;
    for (const auto& note : r.notes) os << "# " << note << "\n";
    const bool knap = r.kind == "knapsack";
    os << "seed,delta,n_samples,model,objective,reliability,wall_ms,status";
    if (knap) os << ",opt_val,gap";
    os << "\n";
    for (const auto& row : r.rows) {
        os << row.seed << "," << fmt(row.delta) << "," << row.n_samples << "," << row.model << "," << fmt(row.objective)
           << "," << fmt(row.reliability) << "," << (with_time ? fmt(row.wall_ms) : "NA") << "," << row.status;
        if (knap) os << "," << fmt(row.opt_val) << "," << (row.model == "CVaR" ? fmt(row.gap) : "NA");
        os << "\n";
    }
    return os.str();
}

std::string report_aggregates_csv(const StudyReport& r) {
    std::ostringstream os;
    os << "cell,mean,q20,q80,count\n";
    for (const auto& [label, a] : r.aggregates)
        os << "\"" << label << "\"," << fmt(a.mean) << "," << fmt(a.q20) << "," << fmt(a.q80) << "," << a.count << "\n";
    return os.str();
}

std::string report_json_lines(const StudyReport& r, bool with_time) {
    using ojson = nlohmann::ordered_json;
    std::ostringstream os;
    auto num = [](double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); };
    for (const auto& note : r.notes) os << ojson{{"note", note}}.dump() << "\n";
    for (const auto& row : r.rows) {
        ojson j;
        j["seed"] = row.seed;
        j["delta"] = row.delta;
        j["n_samples"] = row.n_samples;
        j["model"] = row.model;
        j["objective"] = num(row.objective);
        j["reliability"] = num(row.reliability);
        j["wall_ms"] = with_time ? num(row.wall_ms) : ojson(nullptr);
        j["status"] = row.status;
        if (r.kind == "knapsack") {
            j["opt_val"] = num(row.opt_val);
            j["gap"] = row.model == "CVaR" ? num(row.gap) : ojson(nullptr);
        }
        os << j.dump() << "\n";
    }
    for (const auto& [label, a] : r.aggregates)
        os << ojson{{"cell", label}, {"mean", num(a.mean)}, {"q20", num(a.q20)}, {"q80", num(a.q80)}, {"count", a.count}}.dump()
           << "\n";
    return os.str();
}

}  // namespace drccp
