#include "drccp/conic_ir.hpp"

#include "json_util.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace drccp {

std::string cone_name(ConeKind kind) {
    switch (kind) {
    case ConeKind::Zero: return "zero";
    case ConeKind::Nonnegative: return "nonnegative";
    case ConeKind::SecondOrder: return "second_order";
    default: return "psd";
    }
}

AffineExpr AffineExpr::variable(int var, double coef) {
    AffineExpr e;
    e.add(var, coef);
    return e;
}

AffineExpr& AffineExpr::add(int var, double coef) {
    if (coef != 0.0) terms_.push_back({var, coef});
    return *this;
}

AffineExpr& AffineExpr::add(const AffineExpr& other, double scale) {
    if (scale == 0.0) return *this;
    for (const auto& t : other.terms_) add(t.var, scale * t.coef);
    constant_ += scale * other.constant_;
    return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        constant_ = 0.0;
        return *this;
    }
    for (auto& t : terms_) t.coef *= s;
    constant_ *= s;
    return *this;
}

double AffineExpr::evaluate(const Vector& x) const {
    double v = constant_;
    for (const auto& t : terms_) v += t.coef * x(t.var);
    return v;
}

AffineExpr& AffineExpr::compact() {
    std::stable_sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const auto& t : terms_) {
        if (!merged.empty() && merged.back().var == t.var)
            merged.back().coef += t.coef;
        else
            merged.push_back(t);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Term& t) { return t.coef == 0.0; }),
                 merged.end());
    terms_ = std::move(merged);
    return *this;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
AffineExpr operator*(AffineExpr a, double s) { return a *= s; }

int svec_index(int side, int i, int j) {
    if (i < j) std::swap(i, j);
    // columns 0..j-1 hold side, side-1, ..., side-j+1 entries
    return j * side - j * (j - 1) / 2 + (i - j);
}

Vector svec(const Matrix& m) {
    const int k = static_cast<int>(m.rows());
    Vector v(svec_size(k));
    int pos = 0;
    for (int j = 0; j < k; ++j)
        for (int i = j; i < k; ++i) v(pos++) = (i == j) ? m(i, j) : std::sqrt(2.0) * m(i, j);
    return v;
}

Matrix smat(const Vector& v, int side) {
    Matrix m(side, side);
    int pos = 0;
    for (int j = 0; j < side; ++j)
        for (int i = j; i < side; ++i) {
            const double value = (i == j) ? v(pos) : v(pos) / std::sqrt(2.0);
            m(i, j) = value;
            m(j, i) = value;
            ++pos;
        }
    return m;
}

int ConeProgram::add_variable(std::string name) {
    if (name.empty()) name = "v" + std::to_string(n_vars_);
    names_.push_back(std::move(name));
    return n_vars_++;
}

int ConeProgram::add_variables(int count, const std::string& prefix) {
    const int first = n_vars_;
    for (int k = 0; k < count; ++k)
        add_variable(prefix.empty() ? std::string{} : prefix + "[" + std::to_string(k) + "]");
    return first;
}

void ConeProgram::set_objective(Sense sense, AffineExpr objective) {
    objective.compact();
    for (const auto& t : objective.terms())
        if (t.var < 0 || t.var >= n_vars_) throw ValidationError("objective references an undeclared variable");
    sense_ = sense;
    objective_ = std::move(objective);
}

int ConeProgram::add_block(ConeBlock block) {
    if (block.rows.empty()) throw ValidationError("empty cone block '" + block.label + "'");
    if (block.kind == ConeKind::PositiveSemidefinite) {
        if (block.side < 1 || svec_size(block.side) != block.dim())
            throw ValidationError("PSD block '" + block.label + "' has " + std::to_string(block.dim()) +
                                  " rows, not a triangular number for side " + std::to_string(block.side));
    } else {
        block.side = 0;
    }
    if (block.kind == ConeKind::SecondOrder && block.dim() < 1)
        throw ValidationError("second-order block needs at least one row");
    for (auto& row : block.rows) {
        row.compact();
        if (!std::isfinite(row.constant())) throw ValidationError("non-finite constant in block '" + block.label + "'");
        for (const auto& t : row.terms()) {
            if (t.var < 0 || t.var >= n_vars_)
                throw ValidationError("block '" + block.label + "' references undeclared variable " +
                                      std::to_string(t.var));
            if (!std::isfinite(t.coef)) throw ValidationError("non-finite coefficient in block '" + block.label + "'");
        }
    }
    blocks_.push_back(std::move(block));
    return static_cast<int>(blocks_.size()) - 1;
}

int ConeProgram::add_zero(std::vector<AffineExpr> rows, std::string label) {
    return add_block({ConeKind::Zero, 0, std::move(rows), std::move(label)});
}

int ConeProgram::add_nonnegative(std::vector<AffineExpr> rows, std::string label) {
    return add_block({ConeKind::Nonnegative, 0, std::move(rows), std::move(label)});
}

int ConeProgram::add_second_order(std::vector<AffineExpr> rows, std::string label) {
    return add_block({ConeKind::SecondOrder, 0, std::move(rows), std::move(label)});
}

int ConeProgram::add_psd(const std::vector<std::vector<AffineExpr>>& lower, std::string label) {
    const int k = static_cast<int>(lower.size());
    ConeBlock b{ConeKind::PositiveSemidefinite, k, {}, std::move(label)};
    b.rows.reserve(static_cast<size_t>(svec_size(k)));
    for (int j = 0; j < k; ++j)
        for (int i = j; i < k; ++i) {
            if (static_cast<int>(lower[static_cast<size_t>(i)].size()) <= j)
                throw ValidationError("PSD block: row " + std::to_string(i) + " is too short");
            AffineExpr e = lower[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (i != j) e *= std::sqrt(2.0);
            b.rows.push_back(std::move(e));
        }
    return add_block(std::move(b));
}

void ConeProgram::mark_binary(int var) {
    if (var < 0 || var >= n_vars_) throw ValidationError("binary mark on undeclared variable");
    if (std::find(binaries_.begin(), binaries_.end(), var) == binaries_.end()) binaries_.push_back(var);
}

ConeProgram ConeProgram::relaxed() const {
    ConeProgram copy = *this;
    copy.binaries_.clear();
    return copy;
}

double block_residual(const ConeBlock& block, const Vector& x) {
    Vector v(block.dim());
    for (int r = 0; r < block.dim(); ++r) v(r) = block.rows[static_cast<size_t>(r)].evaluate(x);
    switch (block.kind) {
    case ConeKind::Zero: return -v.cwiseAbs().maxCoeff();
    case ConeKind::Nonnegative: return v.minCoeff();
    case ConeKind::SecondOrder: return v(0) - v.tail(v.size() - 1).norm();
    default: {
        Eigen::SelfAdjointEigenSolver<Matrix> es(smat(v, block.side), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    }
    }
}

std::vector<double> check_solution(const ConeProgram& prog, const Vector& x) {
    if (x.size() != prog.n_vars()) throw ValidationError("check_solution: primal has wrong length");
    std::vector<double> out;
    out.reserve(prog.blocks().size());
    for (const auto& b : prog.blocks()) out.push_back(block_residual(b, x));
    return out;
}

double max_violation(const ConeProgram& prog, const Vector& x) {
    double worst = 0.0;
    for (double r : check_solution(prog, x)) worst = std::max(worst, -r);
    for (int j : prog.binaries()) worst = std::max(worst, std::min(std::abs(x(j)), std::abs(x(j) - 1.0)));
    return worst;
}

namespace {

std::string token_safe(const std::string& s) {
    if (s.empty()) return "-";
    std::string out = s;
    for (char& c : out)
        if (c == ' ' || c == ';' || c == '\t' || c == '\n' || c == '\r') c = '_';
    return out;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_expr(std::ostream& out, const AffineExpr& e) {
    out << fmt_double(e.constant());
    for (const auto& t : e.terms()) out << ' ' << t.var << ':' << fmt_double(t.coef);
}

ConeKind parse_kind(const std::string& s) {
    if (s == "zero") return ConeKind::Zero;
    if (s == "nonnegative") return ConeKind::Nonnegative;
    if (s == "second_order") return ConeKind::SecondOrder;
    if (s == "psd") return ConeKind::PositiveSemidefinite;
    throw ValidationError("unknown cone tag '" + s + "'");
}

double parse_double(const std::string& s) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw ValidationError("bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError("bad number '" + s + "'");
    }
}

int parse_int(const std::string& s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ValidationError("bad integer '" + s + "'");
    return v;
}

// Parses "<constant> var:coef ..." tokens.
AffineExpr parse_expr(const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw ValidationError("empty expression in program text");
    AffineExpr e(parse_double(tokens[0]));
    for (size_t k = 1; k < tokens.size(); ++k) {
        const auto colon = tokens[k].find(':');
        if (colon == std::string::npos) throw ValidationError("bad term '" + tokens[k] + "'");
        e.add(parse_int(tokens[k].substr(0, colon)), parse_double(tokens[k].substr(colon + 1)));
    }
    return e;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

void write_program(std::ostream& out, const ConeProgram& prog) {
    out << "conic-program 1\n";
    out << "variables " << prog.n_vars() << '\n';
    for (int j = 0; j < prog.n_vars(); ++j) out << "name " << j << ' ' << token_safe(prog.variable_name(j)) << '\n';
    out << "objective " << (prog.sense() == Sense::Maximize ? "maximize" : "minimize") << ' ';
    write_expr(out, prog.objective());
    out << '\n';
    if (prog.has_integrality()) {
        out << "binary";
        for (int j : prog.binaries()) out << ' ' << j;
        out << '\n';
    }
    for (const auto& b : prog.blocks()) {
        out << "block " << cone_name(b.kind) << ' ' << b.side << ' ' << b.dim() << ' ' << token_safe(b.label);
        for (const auto& row : b.rows) {
            out << " ; ";
            write_expr(out, row);
        }
        out << '\n';
    }
    out << "end\n";
}

ConeProgram read_program(std::istream& in) {
    ConeProgram prog;
    std::string line;
    if (!std::getline(in, line) || split_ws(line) != std::vector<std::string>{"conic-program", "1"})
        throw ValidationError("program text must start with 'conic-program 1'");
    bool ended = false;
    bool declared = false;
    while (std::getline(in, line)) {
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        const std::string& head = tokens[0];
        if (head == "end") {
            ended = true;
            break;
        }
        if (head == "variables") {
            if (tokens.size() != 2 || declared) throw ValidationError("bad 'variables' record");
            const int n = parse_int(tokens[1]);
            if (n < 0) throw ValidationError("negative variable count");
            prog.add_variables(n);
            declared = true;
        } else if (head == "name") {
            if (tokens.size() != 3) throw ValidationError("bad 'name' record");
            const int j = parse_int(tokens[1]);
            if (j < 0 || j >= prog.n_vars()) throw ValidationError("name for undeclared variable");
            if (tokens[2] != "-") prog.rename_variable(j, tokens[2]);
        } else if (head == "objective") {
            if (tokens.size() < 3) throw ValidationError("bad 'objective' record");
            Sense sense;
            if (tokens[1] == "minimize")
                sense = Sense::Minimize;
            else if (tokens[1] == "maximize")
                sense = Sense::Maximize;
            else
                throw ValidationError("bad objective sense '" + tokens[1] + "'");
            prog.set_objective(sense, parse_expr({tokens.begin() + 2, tokens.end()}));
        } else if (head == "binary") {
            for (size_t k = 1; k < tokens.size(); ++k) prog.mark_binary(parse_int(tokens[k]));
        } else if (head == "block") {
            if (tokens.size() < 5) throw ValidationError("bad 'block' record");
            ConeBlock b;
            b.kind = parse_kind(tokens[1]);
            b.side = parse_int(tokens[2]);
            const int dim = parse_int(tokens[3]);
            b.label = tokens[4] == "-" ? std::string{} : tokens[4];
            std::vector<std::string> current;
            bool open = false;
            for (size_t k = 5; k < tokens.size(); ++k) {
                if (tokens[k] == ";") {
                    if (open) b.rows.push_back(parse_expr(current));
                    current.clear();
                    open = true;
                } else {
                    current.push_back(tokens[k]);
                }
            }
            if (open) b.rows.push_back(parse_expr(current));
            if (b.dim() != dim) throw ValidationError("block row count disagrees with its header");
            prog.add_block(std::move(b));
        } else {
            throw ValidationError("unknown record '" + head + "'");
        }
    }
    if (!ended) throw ValidationError("program text is missing 'end'");
    return prog;
}

std::string program_to_text(const ConeProgram& prog) {
    std::ostringstream os;
    write_program(os, prog);
    return os.str();
}

ConeProgram program_from_text(const std::string& text) {
    std::istringstream is(text);
    return read_program(is);
}

std::string status_name(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NodeLimit: return "NodeLimit";
    default: return "NumericalFailure";
    }
}

std::string solution_to_json(const ConeProgram& prog, const Solution& sol) {
    nlohmann::ordered_json j;
    j["status"] = status_name(sol.status);
    j["objective_value"] = std::isfinite(sol.objective_value) ? nlohmann::ordered_json(sol.objective_value) : nlohmann::ordered_json();
    nlohmann::ordered_json primal = nlohmann::ordered_json::object();
    if (sol.primal.size() == prog.n_vars())
        for (int k = 0; k < prog.n_vars(); ++k) primal[prog.variable_name(k)] = sol.primal(k);
    j["primal"] = primal;
    j["iterations"] = sol.stats.iterations;
    j["nodes"] = sol.stats.nodes;
    return j.dump(1) + "\n";
}

}  // namespace drccp
