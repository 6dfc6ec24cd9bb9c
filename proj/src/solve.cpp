#include "drccp/solve.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>

namespace drccp {

std::unique_ptr<SolverAdapter> make_adapter(const std::string& name) {
    std::string chosen = name;
    if (chosen.empty()) {
        const char* env = std::getenv(kSolverEnvVar);
        chosen = (env && *env) ? env : "ipm";
    }
    if (chosen == "ipm") return std::make_unique<InteriorPointSolver>();
    throw ValidationError("unknown solver adapter '" + chosen + "' (available: ipm)");
}

void require_capabilities(const ConeProgram& prog, const SolverAdapter& adapter) {
    const auto caps = adapter.capabilities();
    for (int b = 0; b < prog.n_blocks(); ++b) {
        const ConeBlock& blk = prog.block(b);
        if (!caps.count(blk.kind))
            throw UnsupportedError("UnsupportedCone: block " + std::to_string(b) + " ('" + blk.label + "') uses the " +
                                   cone_name(blk.kind) + " cone, which adapter '" + adapter.name() + "' lacks");
    }
}

Solution solve_continuous(const ConeProgram& prog, const SolverAdapter& adapter) {
    if (prog.has_integrality())
        throw ValidationError("solve_continuous: program has binary marks; use branch_and_bound or relaxed()");
    require_capabilities(prog, adapter);
    return adapter.solve(prog);
}

ConeProgram fix_variables(const ConeProgram& prog, const std::vector<std::pair<int, double>>& fixes) {
    std::vector<double> value(static_cast<size_t>(prog.n_vars()), std::numeric_limits<double>::quiet_NaN());
    for (const auto& [var, v] : fixes) {
        if (var < 0 || var >= prog.n_vars()) throw ValidationError("fix_variables: undeclared variable");
        value[static_cast<size_t>(var)] = v;
    }
    auto fixed = [&](int var) { return !std::isnan(value[static_cast<size_t>(var)]); };

    ConeProgram out;
    for (int j = 0; j < prog.n_vars(); ++j) out.add_variable(prog.variable_name(j));
    out.set_objective(prog.sense(), prog.objective());
    for (const ConeBlock& blk : prog.blocks()) {
        ConeBlock copy{blk.kind, blk.side, {}, blk.label};
        copy.rows.reserve(blk.rows.size());
        for (const AffineExpr& row : blk.rows) {
            AffineExpr e(row.constant());
            for (const auto& t : row.terms()) {
                if (fixed(t.var))
                    e.add_constant(t.coef * value[static_cast<size_t>(t.var)]);
                else
                    e.add(t.var, t.coef);
            }
            copy.rows.push_back(std::move(e));
        }
        out.add_block(std::move(copy));
    }
    if (!fixes.empty()) {
        std::vector<AffineExpr> pins;
        for (const auto& [var, v] : fixes) pins.push_back(AffineExpr::variable(var) - AffineExpr(v));
        out.add_zero(std::move(pins), "fixed");
    }
    for (int j : prog.binaries())
        if (!fixed(j)) out.mark_binary(j);
    return out;
}

Solution resolve_with_fixed_binaries(const ConeProgram& prog, const Vector& x, const SolverAdapter& adapter) {
    std::vector<std::pair<int, double>> fixes;
    for (int j : prog.binaries()) fixes.emplace_back(j, x(j) >= 0.5 ? 1.0 : 0.0);
    return solve_continuous(fix_variables(prog.relaxed(), fixes), adapter);
}

namespace {

struct Node {
    long id = 0;
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<signed char> fix;  // per binary position: -1 open, 0, 1
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

ConeProgram node_program(const ConeProgram& relaxed, const std::vector<int>& binaries, const Node& node) {
    std::vector<std::pair<int, double>> fixes;
    std::vector<AffineExpr> bounds;
    for (size_t p = 0; p < binaries.size(); ++p) {
        const int var = binaries[p];
        if (node.fix[p] >= 0) {
            fixes.emplace_back(var, static_cast<double>(node.fix[p]));
        } else {
            bounds.push_back(AffineExpr::variable(var));
            bounds.push_back(AffineExpr(1.0) - AffineExpr::variable(var));
        }
    }
    ConeProgram p = fix_variables(relaxed, fixes);
    if (!bounds.empty()) p.add_nonnegative(std::move(bounds), "binary_bounds");
    return p;
}

}  // namespace

Solution branch_and_bound(const ConeProgram& prog, const SolverAdapter& adapter, const BnbConfig& cfg) {
    if (!(cfg.rel_gap > 0.0 && cfg.abs_gap > 0.0 && cfg.integrality_tol > 0.0) || cfg.max_nodes < 1 ||
        cfg.batch_size < 1 || cfg.workers < 1)
        throw ValidationError("branch_and_bound: tolerances must be positive and counts at least 1");
    if (!prog.has_integrality()) return solve_continuous(prog, adapter);
    require_capabilities(prog, adapter);
    const auto start = std::chrono::steady_clock::now();

    const double sign = prog.sense() == Sense::Maximize ? -1.0 : 1.0;
    std::vector<int> binaries = prog.binaries();
    std::sort(binaries.begin(), binaries.end());
    const ConeProgram relaxed = prog.relaxed();

    Solution result;
    result.primal = Vector::Zero(prog.n_vars());
    double incumbent = std::numeric_limits<double>::infinity();
    bool have_incumbent = false;

    auto try_incumbent = [&](const Vector& x, long node_id) {
        Solution fixed = resolve_with_fixed_binaries(prog, x, adapter);
        result.stats.iterations += fixed.stats.iterations;
        if (fixed.status != SolveStatus::Optimal) return;
        const double v = sign * fixed.objective_value;
        if (v < incumbent) {
            incumbent = v;
            have_incumbent = true;
            result.primal = fixed.primal;
            for (int j : binaries) result.primal(j) = fixed.primal(j) >= 0.5 ? 1.0 : 0.0;
            result.stats.incumbent_trace.push_back({node_id, fixed.objective_value});
        }
    };

    if (cfg.initial_incumbent) {
        if (cfg.initial_incumbent->size() != prog.n_vars())
            throw ValidationError("branch_and_bound: initial incumbent has wrong length");
        try_incumbent(*cfg.initial_incumbent, -1);
    }

    auto cutoff = [&]() {
        if (!have_incumbent) return std::numeric_limits<double>::infinity();
        return incumbent - std::max(cfg.abs_gap, cfg.rel_gap * std::abs(incumbent));
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push(Node{next_id++, -std::numeric_limits<double>::infinity(), std::vector<signed char>(binaries.size(), -1)});
    long solved = 0;
    bool node_limit = false;
    long failures = 0;

    while (!open.empty()) {
        if (open.top().bound >= cutoff()) break;
        if (solved >= cfg.max_nodes) {
            node_limit = true;
            break;
        }
        std::vector<Node> batch;
        while (!open.empty() && static_cast<int>(batch.size()) < cfg.batch_size && solved + static_cast<long>(batch.size()) < cfg.max_nodes &&
               open.top().bound < cutoff()) {
            batch.push_back(open.top());
            open.pop();
        }
        std::vector<Solution> sols(batch.size());
        parallel_for(static_cast<int>(batch.size()), cfg.workers, [&](int i) {
            sols[static_cast<size_t>(i)] = adapter.solve(node_program(relaxed, binaries, batch[static_cast<size_t>(i)]));
        });
        for (size_t bi = 0; bi < batch.size(); ++bi) {
            const Node& node = batch[bi];
            const Solution& s = sols[bi];
            ++solved;
            result.stats.iterations += s.stats.iterations;
            if (s.status == SolveStatus::Infeasible) continue;
            int branch_pos = -1;
            double value = node.bound;
            if (s.status == SolveStatus::Optimal) {
                value = sign * s.objective_value;
                if (value >= cutoff()) continue;
                double worst = cfg.integrality_tol;
                for (size_t p = 0; p < binaries.size(); ++p) {
                    if (node.fix[p] >= 0) continue;
                    const double xv = s.primal(binaries[p]);
                    const double frac = std::min(std::abs(xv), std::abs(1.0 - xv));
                    if (frac > worst) {
                        worst = frac;
                        branch_pos = static_cast<int>(p);
                    }
                }
                if (branch_pos < 0) {
                    try_incumbent(s.primal, node.id);
                    continue;
                }
            } else {
                // No usable relaxation: split on the first open binary and keep the parent bound.
                ++failures;
                for (size_t p = 0; p < binaries.size() && branch_pos < 0; ++p)
                    if (node.fix[p] < 0) branch_pos = static_cast<int>(p);
                if (branch_pos < 0) continue;
            }
            for (signed char v : {0, 1}) {
                Node child{next_id++, value, node.fix};
                child.fix[static_cast<size_t>(branch_pos)] = v;
                open.push(std::move(child));
            }
        }
    }

    result.stats.nodes = solved;
    double bound = have_incumbent ? incumbent : std::numeric_limits<double>::infinity();
    if (!open.empty()) bound = std::min(bound, open.top().bound);
    result.stats.best_bound = sign * bound;
    result.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!have_incumbent) {
        result.status = node_limit ? SolveStatus::NodeLimit
                                   : (failures > 0 ? SolveStatus::NumericalFailure : SolveStatus::Infeasible);
        result.objective_value = std::numeric_limits<double>::quiet_NaN();
        return result;
    }
    result.objective_value = sign * incumbent;
    result.status = node_limit ? SolveStatus::NodeLimit : SolveStatus::Optimal;
    return result;
}

}  // namespace drccp
