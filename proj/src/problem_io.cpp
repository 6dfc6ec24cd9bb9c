#include "drccp/problem_io.hpp"

#include "json_util.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace drccp {

using jsonio::field;
using jsonio::from_matrix;
using jsonio::from_vector;
using jsonio::json;
using jsonio::to_matrix;
using jsonio::to_vector;

namespace {

const char* norm_text(GroundNorm n) {
    switch (n) {
    case GroundNorm::L1: return "L1";
    case GroundNorm::Linf: return "Linf";
    default: return "L2";
    }
}

GroundNorm parse_norm(const std::string& s) {
    if (s == "L1") return GroundNorm::L1;
    if (s == "L2") return GroundNorm::L2;
    if (s == "Linf") return GroundNorm::Linf;
    throw ValidationError("unknown ground norm '" + s + "'");
}

json support_json(const SupportSet& s) {
    json j;
    j["kind"] = support_name(s);
    if (const auto* f = std::get_if<FullSpace>(&s)) {
        j["dim"] = f->dim;
    } else if (const auto* p = std::get_if<Polyhedron>(&s)) {
        j["rows"] = from_matrix(p->rows);
        j["offsets"] = from_vector(p->offsets);
    } else if (const auto* e = std::get_if<Ellipsoid>(&s)) {
        j["shape"] = from_matrix(e->shape);
        j["center"] = from_vector(e->center);
    } else if (const auto* b = std::get_if<Box>(&s)) {
        j["lower"] = from_vector(b->lower);
        j["upper"] = from_vector(b->upper);
    }
    return j;
}

SupportSet parse_support(const json& j) {
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind == "FullSpace") return FullSpace{field(j, "dim").get<int>()};
    if (kind == "Polyhedron") {
        Vector offsets = to_vector(field(j, "offsets"));
        return Polyhedron{to_matrix(field(j, "rows")), offsets};
    }
    if (kind == "Ellipsoid") return Ellipsoid{to_matrix(field(j, "shape")), to_vector(field(j, "center"))};
    if (kind == "Box") return Box{to_vector(field(j, "lower")), to_vector(field(j, "upper"))};
    throw ValidationError("unknown support kind '" + kind + "'");
}

json constraint_json(const ConstraintFunction& f) {
    json j;
    j["kind"] = constraint_name(f);
    if (const auto* a = std::get_if<AffineBoth>(&f)) {
        j["A"] = from_matrix(a->A);
        j["a"] = from_vector(a->a);
        j["b"] = from_vector(a->b);
        j["h"] = a->h;
    } else if (const auto* q = std::get_if<QuadraticXi>(&f)) {
        j["A"] = from_matrix(q->A);
        j["b"] = from_vector(q->b);
        j["h"] = q->h;
    } else {
        const auto& bq = std::get<BilinearQuadratic>(f);
        json ws = json::array(), rs = json::array();
        for (const auto& w : bq.W) ws.push_back(from_matrix(w));
        for (const auto& r : bq.r) rs.push_back(from_vector(r));
        j["W"] = ws;
        j["r"] = rs;
        j["h"] = from_vector(bq.h);
    }
    return j;
}

ConstraintFunction parse_constraint(const json& j, long n, long m) {
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind == "AffineBoth")
        return AffineBoth{to_matrix(field(j, "A"), n), to_vector(field(j, "a")), to_vector(field(j, "b")),
                          field(j, "h").get<double>()};
    if (kind == "QuadraticXi")
        return QuadraticXi{to_matrix(field(j, "A"), m), to_vector(field(j, "b")), field(j, "h").get<double>()};
    if (kind == "BilinearQuadratic") {
        BilinearQuadratic bq;
        for (const auto& w : field(j, "W")) bq.W.push_back(to_matrix(w, m));
        for (const auto& r : field(j, "r")) bq.r.push_back(to_vector(r));
        bq.h = to_vector(field(j, "h"));
        return bq;
    }
    throw ValidationError("unknown constraint kind '" + kind + "'");
}

const char* domain_kind_text(Domain::Kind k) {
    switch (k) {
    case Domain::Kind::Binary: return "Binary";
    case Domain::Kind::Linear: return "Linear";
    default: return "Box";
    }
}

}  // namespace

std::string problem_to_text(const DrccpProblem& p) {
    json j;
    j["type"] = "DrccpProblem";
    j["objective"] = from_vector(p.objective);
    j["sense"] = p.sense == Sense::Maximize ? "maximize" : "minimize";
    json dom;
    dom["kind"] = domain_kind_text(p.domain.kind);
    dom["lower"] = from_vector(p.domain.lower);
    dom["upper"] = from_vector(p.domain.upper);
    dom["ineq_rows"] = from_matrix(p.domain.ineq_rows);
    dom["ineq_rhs"] = from_vector(p.domain.ineq_rhs);
    dom["eq_rows"] = from_matrix(p.domain.eq_rows);
    dom["eq_rhs"] = from_vector(p.domain.eq_rhs);
    j["domain"] = dom;
    json rows = json::array();
    for (const auto& f : p.constraints) rows.push_back(constraint_json(f));
    j["constraints"] = rows;
    j["risk"] = p.risk;
    json ball;
    ball["radius"] = p.ball.radius;
    ball["norm"] = norm_text(p.ball.norm);
    json center;
    json samples = json::array();
    for (const auto& s : p.ball.center.samples) samples.push_back(from_vector(s));
    center["samples"] = samples;
    center["n_samples"] = p.ball.center.n_samples();
    center["dim"] = p.ball.center.dim;
    ball["center"] = center;
    j["ball"] = ball;
    j["support"] = support_json(p.support);
    return j.dump(1) + "\n";
}

DrccpProblem problem_from_text(const std::string& text) {
    try {
        json j = json::parse(text);
        if (j.contains("type") && j["type"] != "DrccpProblem")
            throw ValidationError("file holds a '" + j["type"].get<std::string>() + "', not a DrccpProblem");
        DrccpProblem p;
        p.objective = to_vector(field(j, "objective"));
        const std::string sense = field(j, "sense").get<std::string>();
        if (sense != "minimize" && sense != "maximize") throw ValidationError("sense must be minimize or maximize");
        p.sense = sense == "maximize" ? Sense::Maximize : Sense::Minimize;
        p.support = parse_support(field(j, "support"));
        const long n = p.objective.size();
        const long m = support_dim(p.support);

        const json& dom = field(j, "domain");
        const std::string kind = field(dom, "kind").get<std::string>();
        if (kind == "Binary")
            p.domain.kind = Domain::Kind::Binary;
        else if (kind == "Box")
            p.domain.kind = Domain::Kind::Box;
        else if (kind == "Linear")
            p.domain.kind = Domain::Kind::Linear;
        else
            throw ValidationError("unknown domain kind '" + kind + "'");
        const double inf = std::numeric_limits<double>::infinity();
        if (dom.contains("lower")) p.domain.lower = to_vector(dom["lower"], -inf);
        if (dom.contains("upper")) p.domain.upper = to_vector(dom["upper"], inf);
        if (dom.contains("ineq_rows")) p.domain.ineq_rows = to_matrix(dom["ineq_rows"], n);
        if (dom.contains("ineq_rhs")) p.domain.ineq_rhs = to_vector(dom["ineq_rhs"]);
        if (dom.contains("eq_rows")) p.domain.eq_rows = to_matrix(dom["eq_rows"], n);
        if (dom.contains("eq_rhs")) p.domain.eq_rhs = to_vector(dom["eq_rhs"]);

        for (const auto& row : field(j, "constraints")) p.constraints.push_back(parse_constraint(row, n, m));
        p.risk = field(j, "risk").get<double>();

        const json& ball = field(j, "ball");
        p.ball.radius = field(ball, "radius").get<double>();
        p.ball.norm = parse_norm(field(ball, "norm").get<std::string>());
        const json& center = field(ball, "center");
        p.ball.center.dim = field(center, "dim").get<int>();
        for (const auto& s : field(center, "samples")) p.ball.center.samples.push_back(to_vector(s));
        if (center.contains("n_samples") && center["n_samples"].get<int>() != p.ball.center.n_samples())
            throw ValidationError("n_samples disagrees with the number of listed samples");
        return p;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed problem file: ") + e.what());
    }
}

std::string transport_to_text(const TransportProblem& t) {
    const TransportInstance& inst = t.instance;
    json j;
    j["type"] = "TransportProblem";
    j["m"] = inst.m;
    j["n"] = inst.n;
    j["L_low"] = inst.L_low;
    j["L_high"] = inst.L_high;
    j["d"] = from_vector(inst.d);
    j["mu"] = from_vector(inst.mu);
    j["Sigma"] = from_matrix(inst.Sigma);
    j["seed"] = inst.seed;
    j["clip_rate"] = t.clip_rate;
    json samples = json::array();
    for (const auto& s : t.samples) samples.push_back(from_vector(s));
    j["samples"] = samples;
    return j.dump(1) + "\n";
}

TransportProblem transport_from_text(const std::string& text) {
    try {
        json j = json::parse(text);
        if (field(j, "type") != "TransportProblem") throw ValidationError("file does not hold a TransportProblem");
        TransportProblem t;
        TransportInstance& inst = t.instance;
        inst.m = field(j, "m").get<int>();
        inst.n = field(j, "n").get<int>();
        inst.L_low = field(j, "L_low").get<double>();
        inst.L_high = field(j, "L_high").get<double>();
        inst.d = to_vector(field(j, "d"));
        if (j.contains("mu")) inst.mu = to_vector(j["mu"]);
        if (j.contains("Sigma")) inst.Sigma = to_matrix(j["Sigma"], inst.arcs());
        if (j.contains("seed")) inst.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("clip_rate")) t.clip_rate = j["clip_rate"].get<double>();
        for (const auto& s : field(j, "samples")) t.samples.push_back(to_vector(s));
        validate_transport(inst);
        for (const auto& s : t.samples)
            if (s.size() != inst.arcs()) throw ValidationError("transport sample dimension differs from m*n");
        return t;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed transport file: ") + e.what());
    }
}

std::string problem_file_type(const std::string& text) {
    try {
        json j = json::parse(text);
        if (!j.is_object()) throw ValidationError("problem file must hold a JSON object");
        return j.contains("type") ? j["type"].get<std::string>() : std::string("DrccpProblem");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed problem file: ") + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ValidationError("write failed for '" + path + "'");
}

DrccpProblem load_problem(const std::string& path) { return problem_from_text(read_text_file(path)); }

void save_problem(const DrccpProblem& p, const std::string& path) { write_text_file(path, problem_to_text(p)); }

}  // namespace drccp
