#include "drccp/transport.hpp"

#include "drccp/reformulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace drccp {

void validate_transport(const TransportInstance& inst) {
    if (inst.m < 1 || inst.n < 1) throw ValidationError("transport: m and n must be positive");
    if (inst.d.size() != inst.arcs()) throw ValidationError("transport: d must have m*n entries");
    if ((inst.d.array() < 0.0).any()) throw ValidationError("transport: d must be nonnegative");
    if (!(inst.L_high >= 0.0) || !(inst.L_low <= inst.m * inst.L_high))
        throw ValidationError("transport: need L_low <= m * L_high");
}

namespace {

void check_samples(const TransportInstance& inst, const std::vector<Vector>& samples) {
    if (samples.empty()) throw ValidationError("transport: at least one sample is required");
    for (const auto& s : samples)
        if (s.size() != inst.arcs()) throw ValidationError("transport: sample dimension differs from m*n");
}

/// Flow rows sum_j x_kj = a_k and sum_k x_kj = b_j for one plan.
void add_flow_rows(ConeProgram& prog, const TransportInstance& inst, const std::vector<int>& x,
                   const std::vector<int>& a, const std::vector<int>& b, const std::string& label) {
    std::vector<AffineExpr> rows;
    for (int k = 0; k < inst.m; ++k) {
        AffineExpr e = AffineExpr::variable(a[static_cast<size_t>(k)], -1.0);
        for (int j = 0; j < inst.n; ++j) e.add(x[static_cast<size_t>(inst.arc(k, j))], 1.0);
        rows.push_back(std::move(e));
    }
    for (int j = 0; j < inst.n; ++j) {
        AffineExpr e = AffineExpr::variable(b[static_cast<size_t>(j)], -1.0);
        for (int k = 0; k < inst.m; ++k) e.add(x[static_cast<size_t>(inst.arc(k, j))], 1.0);
        rows.push_back(std::move(e));
    }
    prog.add_zero(std::move(rows), label);
}

/// sum a = sum b >= L_low, 0 <= a <= L_high, b >= 0.
void add_first_stage(ConeProgram& prog, const TransportInstance& inst, const std::vector<int>& a,
                     const std::vector<int>& b) {
    AffineExpr balance;
    AffineExpr supply(-inst.L_low);
    for (int k : a) {
        balance.add(k, 1.0);
        supply.add(k, 1.0);
    }
    for (int j : b) balance.add(j, -1.0);
    prog.add_zero({balance}, "balance");
    std::vector<AffineExpr> rows{supply};
    for (int k : a) {
        rows.push_back(AffineExpr::variable(k));
        rows.push_back(AffineExpr(inst.L_high) - AffineExpr::variable(k));
    }
    for (int j : b) rows.push_back(AffineExpr::variable(j));
    prog.add_nonnegative(std::move(rows), "first_stage");
}

std::vector<int> named(ConeProgram& prog, int count, const std::string& base) {
    std::vector<int> out;
    for (int k = 0; k < count; ++k) out.push_back(prog.add_variable(base + "[" + std::to_string(k) + "]"));
    return out;
}

}  // namespace

TransportCvarProgram build_transport_cvar_lp(const TransportInstance& inst, const std::vector<Vector>& samples,
                                             double eps, double delta) {
    validate_transport(inst);
    check_samples(inst, samples);
    if (!(eps > 0.0 && eps < 1.0) || !(delta >= 0.0)) throw ValidationError("transport: need 0 < eps < 1, delta >= 0");
    const int N = static_cast<int>(samples.size());
    const int R = inst.arcs();

    TransportCvarProgram out;
    ConeProgram& prog = out.program;
    TransportCvarLayout& L = out.layout;
    L.a = named(prog, inst.m, "a");
    L.b = named(prog, inst.n, "b");
    L.z = prog.add_variable("z");
    L.alpha = prog.add_variable("alpha");
    for (int i = 0; i < N; ++i) {
        const std::string tag = "[" + std::to_string(i) + "]";
        L.x.push_back(named(prog, R, "x" + tag));
        L.y.push_back(named(prog, R, "y" + tag));
        L.v.push_back(named(prog, R, "v" + tag));
        L.q.push_back(prog.add_variable("q" + tag));
    }
    prog.set_objective(Sense::Minimize, AffineExpr::variable(L.z));
    add_first_stage(prog, inst, L.a, L.b);
    prog.add_nonnegative({AffineExpr::variable(L.alpha) - AffineExpr(kAlphaMin)}, "alpha_min");

    // delta |v_ir| + (1/N) sum_i q_i <= eps alpha
    AffineExpr budget = AffineExpr::variable(L.alpha, eps);
    for (int q : L.q) budget.add(q, -1.0 / N);
    if (delta == 0.0) {
        prog.add_nonnegative({budget}, "norm");
    } else {
        for (int i = 0; i < N; ++i) {
            std::vector<AffineExpr> rows;
            for (int r = 0; r < R; ++r) {
                rows.push_back(budget - AffineExpr::variable(L.v[i][r], delta));
                rows.push_back(budget + AffineExpr::variable(L.v[i][r], delta));
            }
            prog.add_nonnegative(std::move(rows), "norm[" + std::to_string(i) + "]");
        }
    }

    for (int i = 0; i < N; ++i) {
        const std::string tag = "[" + std::to_string(i) + "]";
        // z - alpha + v_i^T zeta_i + q_i - d^T y_i >= 0
        AffineExpr epi = AffineExpr::variable(L.z) - AffineExpr::variable(L.alpha) + AffineExpr::variable(L.q[i]);
        for (int r = 0; r < R; ++r) {
            epi.add(L.v[i][r], samples[static_cast<size_t>(i)](r));
            epi.add(L.y[i][r], -inst.d(r));
        }
        std::vector<AffineExpr> rows{epi, AffineExpr::variable(L.q[i])};
        for (int r = 0; r < R; ++r) {
            rows.push_back(AffineExpr::variable(L.y[i][r]) - AffineExpr::variable(L.v[i][r]) -
                           AffineExpr::variable(L.x[i][r]));
            rows.push_back(AffineExpr::variable(L.y[i][r]));
            rows.push_back(AffineExpr::variable(L.x[i][r]));
        }
        prog.add_nonnegative(std::move(rows), "epigraph" + tag);
        add_flow_rows(prog, inst, L.x[i], L.a, L.b, "flow" + tag);
    }
    return out;
}

TransportSaaProgram build_saa_milp(const TransportInstance& inst, const std::vector<Vector>& samples, double eps) {
    validate_transport(inst);
    check_samples(inst, samples);
    if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("transport: need 0 <= eps < 1");
    const int N = static_cast<int>(samples.size());
    const int R = inst.arcs();
    // Any plan ships at most m * L_high units at unit cost at most max d.
    const double big_m = inst.d.maxCoeff() * inst.m * inst.L_high;

    TransportSaaProgram out;
    ConeProgram& prog = out.program;
    TransportSaaLayout& L = out.layout;
    L.a = named(prog, inst.m, "a");
    L.b = named(prog, inst.n, "b");
    L.z = prog.add_variable("z");
    for (int i = 0; i < N; ++i) L.x.push_back(named(prog, R, "x[" + std::to_string(i) + "]"));
    L.s = named(prog, N, "s");
    for (int s : L.s) prog.mark_binary(s);
    L.M.assign(static_cast<size_t>(N), big_m);
    prog.set_objective(Sense::Minimize, AffineExpr::variable(L.z));
    add_first_stage(prog, inst, L.a, L.b);

    AffineExpr cover(-(1.0 - eps));
    for (int s : L.s) cover.add(s, 1.0 / N);
    std::vector<AffineExpr> rows{cover};
    for (int i = 0; i < N; ++i) {
        // z - zeta_i^T x_i - M (s_i - 1) >= 0
        AffineExpr e = AffineExpr::variable(L.z) + AffineExpr(big_m) - AffineExpr::variable(L.s[i], big_m);
        for (int r = 0; r < R; ++r) e.add(L.x[i][r], -samples[static_cast<size_t>(i)](r));
        rows.push_back(std::move(e));
        for (int r = 0; r < R; ++r) rows.push_back(AffineExpr::variable(L.x[i][r]));
    }
    prog.add_nonnegative(std::move(rows), "indicator");
    for (int i = 0; i < N; ++i) add_flow_rows(prog, inst, L.x[i], L.a, L.b, "flow[" + std::to_string(i) + "]");
    return out;
}

double transport_cost(const TransportInstance& inst, const Vector& xi, const Vector& a, const Vector& b) {
    const int m = inst.m, n = inst.n;
    if (xi.size() != inst.arcs() || a.size() != m || b.size() != n)
        throw ValidationError("transport_cost: dimension mismatch");
    const double supply = a.sum(), demand = b.sum();
    if (std::abs(supply - demand) > 1e-6 * std::max(1.0, supply))
        throw Error("transport_cost: supply " + std::to_string(supply) + " differs from demand " + std::to_string(demand));

    // Successive shortest paths on source -> facility -> customer -> sink. Bellman-Ford handles
    // the negative reduced costs of backward arcs; the graph has m + n + 2 nodes.
    const int src = m + n, V = m + n + 2;
    Vector left_a = a.cwiseMax(0.0), left_b = b.cwiseMax(0.0);
    Matrix flow = Matrix::Zero(m, n);
    const double tol = 1e-12 * std::max(1.0, supply);
    double cost = 0.0;
    for (int iter = 0; iter < 4 * (m + n) * (m * n + 1); ++iter) {
        if (left_a.sum() <= tol) break;
        std::vector<double> dist(static_cast<size_t>(V), std::numeric_limits<double>::infinity());
        std::vector<int> prev(static_cast<size_t>(V), -1);
        dist[static_cast<size_t>(src)] = 0.0;
        for (int k = 0; k < m; ++k)
            if (left_a(k) > tol) {
                dist[static_cast<size_t>(k)] = 0.0;
                prev[static_cast<size_t>(k)] = src;
            }
        for (int pass = 0; pass < V; ++pass) {
            bool changed = false;
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < n; ++j) {
                    const double c = xi(inst.arc(k, j));
                    const size_t kk = static_cast<size_t>(k), jj = static_cast<size_t>(m + j);
                    if (dist[kk] + c < dist[jj] - 1e-15) {
                        dist[jj] = dist[kk] + c;
                        prev[jj] = k;
                        changed = true;
                    }
                    if (flow(k, j) > tol && dist[jj] - c < dist[kk] - 1e-15) {
                        dist[kk] = dist[jj] - c;
                        prev[kk] = m + j;
                        changed = true;
                    }
                }
            if (!changed) break;
        }
        int best_j = -1;
        for (int j = 0; j < n; ++j)
            if (left_b(j) > tol && std::isfinite(dist[static_cast<size_t>(m + j)]) &&
                (best_j < 0 || dist[static_cast<size_t>(m + j)] < dist[static_cast<size_t>(m + best_j)]))
                best_j = j;
        if (best_j < 0) break;
        // Walk back to the source to find the bottleneck.
        std::vector<int> path{m + best_j};
        while (prev[static_cast<size_t>(path.back())] != src) path.push_back(prev[static_cast<size_t>(path.back())]);
        double push = std::min(left_b(best_j), left_a(path.back()));
        for (size_t p = 0; p + 1 < path.size(); ++p) {
            const int to = path[p], from = path[p + 1];
            if (from >= m) push = std::min(push, flow(to, from - m));  // backward arc customer -> facility
        }
        for (size_t p = 0; p + 1 < path.size(); ++p) {
            const int to = path[p], from = path[p + 1];
            if (from < m)
                flow(from, to - m) += push;
            else
                flow(to, from - m) -= push;
        }
        left_b(best_j) -= push;
        left_a(path.back()) -= push;
    }
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < n; ++j) cost += xi(inst.arc(k, j)) * flow(k, j);
    return cost;
}

}  // namespace drccp
