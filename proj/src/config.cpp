#include "gradvi/config.hpp"

#include "gradvi/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gradvi {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error("config: " + (where.empty() ? std::string("<root>") : where) + ": " + what);
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

void allow_only(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) fail(where, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) fail(join(where, k), "unknown key");
    }
}

const json& need(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(join(where, key), "missing");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "must be finite");
    return v;
}

double positive(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v > 0.0)) fail(where, "must be positive");
    return v;
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::size_t count(const json& j, const std::string& where) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(where, "expected a nonnegative integer");
    const auto v = j.get<long long>();
    if (v <= 0) fail(where, "must be positive");
    return static_cast<std::size_t>(v);
}

DomainShape domain_from_json(const json& j, const std::string& where) {
    try {
        if (j.is_string()) return DomainShape::from_descriptor(j.get<std::string>());
        const auto& kind = need(j, where, "kind");
        if (!kind.is_string()) fail(join(where, "kind"), "expected a string");
        const std::string k = kind.get<std::string>();
        if (k == "interval") {
            allow_only(j, where, {"kind", "a", "b"});
            return DomainShape::interval(number(need(j, where, "a"), join(where, "a")),
                                         number(need(j, where, "b"), join(where, "b")));
        }
        if (k == "rectangle") {
            allow_only(j, where, {"kind", "corner", "widths"});
            const auto c = numbers(need(j, where, "corner"), join(where, "corner"));
            const auto w = numbers(need(j, where, "widths"), join(where, "widths"));
            if (c.size() != 2) fail(join(where, "corner"), "expected 2 numbers");
            if (w.size() != 2) fail(join(where, "widths"), "expected 2 numbers");
            return DomainShape::rectangle(c[0], c[1], w[0], w[1]);
        }
        if (k == "disk") {
            allow_only(j, where, {"kind", "center", "radius"});
            const auto c = numbers(need(j, where, "center"), join(where, "center"));
            if (c.size() != 2) fail(join(where, "center"), "expected 2 numbers");
            return DomainShape::disk(c[0], c[1], positive(need(j, where, "radius"), join(where, "radius")));
        }
        if (k == "polygon") {
            allow_only(j, where, {"kind", "vertices"});
            const auto& vs = need(j, where, "vertices");
            if (!vs.is_array()) fail(join(where, "vertices"), "expected an array of [x, y] pairs");
            std::vector<std::array<double, 2>> pts;
            for (std::size_t i = 0; i < vs.size(); ++i) {
                const std::string w = join(where, "vertices") + "[" + std::to_string(i) + "]";
                const auto p = numbers(vs[i], w);
                if (p.size() != 2) fail(w, "expected 2 numbers");
                pts.push_back({p[0], p[1]});
            }
            return DomainShape::polygon(std::move(pts));
        }
        fail(join(where, "kind"), "unknown domain kind '" + k + "'");
    } catch (const Error& e) {
        const std::string msg = e.what();
        if (msg.rfind("config:", 0) == 0) throw;
        fail(where, msg);
    }
}

json domain_to_json(const DomainShape& d) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return {{"kind", "interval"}, {"a", s.a}, {"b", s.b}};
            } else if constexpr (std::is_same_v<T, Rectangle>) {
                return {{"kind", "rectangle"}, {"corner", {s.x0, s.y0}}, {"widths", {s.width, s.height}}};
            } else if constexpr (std::is_same_v<T, Disk>) {
                return {{"kind", "disk"}, {"center", {s.cx, s.cy}}, {"radius", s.radius}};
            } else {
                json vs = json::array();
                for (const auto& v : s.vertices) vs.push_back({v[0], v[1]});
                return {{"kind", "polygon"}, {"vertices", vs}};
            }
        },
        d.kind());
}

const char* zero_order_name(ZeroOrderSpec::Kind k) {
    switch (k) {
        case ZeroOrderSpec::Kind::Linear: return "linear";
        case ZeroOrderSpec::Kind::Quadratic: return "quadratic";
        case ZeroOrderSpec::Kind::Quartic: return "quartic";
    }
    return "linear";
}

}  // namespace

const char* formulation_name(Formulation f) {
    switch (f) {
        case Formulation::Obstacle: return "obstacle";
        case Formulation::Gradient: return "gradient";
        case Formulation::Vector: return "vector";
        case Formulation::Both: return "both";
    }
    return "both";
}

ZeroOrderTerm make_term(const ZeroOrderSpec& spec, double eta) {
    const double a = spec.a, b = spec.b;
    switch (spec.kind) {
        case ZeroOrderSpec::Kind::Linear:
            return ZeroOrderTerm::linear(eta);
        case ZeroOrderSpec::Kind::Quadratic:
            return ZeroOrderTerm::pluggable(eta, {[a, b](double v) { return a * v * v + b * v; },
                                                  [a, b](double v) { return 2.0 * a * v + b; },
                                                  [a](double) { return 2.0 * a; }});
        case ZeroOrderSpec::Kind::Quartic:
            return ZeroOrderTerm::pluggable(eta, {[a, b](double v) { return a * v * v * v * v + b * v; },
                                                  [a, b](double v) { return 4.0 * a * v * v * v + b; },
                                                  [a](double v) { return 12.0 * a * v * v; }});
    }
    return ZeroOrderTerm::linear(eta);
}

double parse_spacing(const json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        const auto slash = s.find('/');
        try {
            std::size_t used = 0;
            if (slash == std::string::npos) {
                const double v = std::stod(s, &used);
                if (used != s.size() || !(v > 0.0) || !std::isfinite(v)) fail(where, "bad spacing '" + s + "'");
                return v;
            }
            const std::string ps = s.substr(0, slash), qs = s.substr(slash + 1);
            const double p = std::stod(ps, &used);
            if (used != ps.size()) fail(where, "bad spacing '" + s + "'");
            const double q = std::stod(qs, &used);
            if (used != qs.size()) fail(where, "bad spacing '" + s + "'");
            const double v = p / q;
            if (!(v > 0.0) || !std::isfinite(v)) fail(where, "spacing must be positive");
            return v;
        } catch (const std::invalid_argument&) {
            fail(where, "bad spacing '" + s + "'");
        } catch (const std::out_of_range&) {
            fail(where, "bad spacing '" + s + "'");
        }
    }
    return positive(j, where);
}

ConvexBody body_from_json(const json& j, const std::string& where, std::size_t dim) {
    const auto& fam = need(j, where, "family");
    if (!fam.is_string()) fail(join(where, "family"), "expected a string");
    const std::string f = fam.get<std::string>();
    try {
        if (f == "ball") {
            allow_only(j, where, {"family", "radius"});
            return ConvexBody::euclidean_ball(dim, positive(need(j, where, "radius"), join(where, "radius")));
        }
        if (f == "pball") {
            allow_only(j, where, {"family", "p", "radius"});
            const double p = number(need(j, where, "p"), join(where, "p"));
            if (!(p >= 1.0)) fail(join(where, "p"), "must be >= 1");
            return ConvexBody::pnorm_ball(dim, p, positive(need(j, where, "radius"), join(where, "radius")));
        }
        if (f == "box") {
            allow_only(j, where, {"family", "half_widths"});
            const auto w = numbers(need(j, where, "half_widths"), join(where, "half_widths"));
            if (w.size() != dim) fail(join(where, "half_widths"), "expected " + std::to_string(dim) + " entries");
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (!(w[i] > 0.0)) fail(join(where, "half_widths") + "[" + std::to_string(i) + "]", "must be positive");
            }
            return ConvexBody::box(w);
        }
        if (f == "cross") {
            allow_only(j, where, {"family", "scale"});
            return ConvexBody::cross_polytope(dim, positive(need(j, where, "scale"), join(where, "scale")));
        }
        if (f == "polytope") {
            allow_only(j, where, {"family", "halfspaces"});
            const auto& hs = need(j, where, "halfspaces");
            if (!hs.is_array()) fail(join(where, "halfspaces"), "expected an array");
            std::vector<Halfspace> out;
            for (std::size_t i = 0; i < hs.size(); ++i) {
                const std::string w = join(where, "halfspaces") + "[" + std::to_string(i) + "]";
                allow_only(hs[i], w, {"normal", "offset"});
                const auto n = numbers(need(hs[i], w, "normal"), join(w, "normal"));
                if (n.size() != dim) fail(join(w, "normal"), "expected " + std::to_string(dim) + " entries");
                out.push_back({n, positive(need(hs[i], w, "offset"), join(w, "offset"))});
            }
            return ConvexBody::polytope(std::move(out));
        }
    } catch (const Error& e) {
        const std::string msg = e.what();
        if (msg.rfind("config:", 0) == 0) throw;
        fail(where, msg);
    }
    fail(join(where, "family"), "unknown family '" + f + "'");
}

json body_to_json(const ConvexBody& body) {
    return std::visit(
        [](const auto& f) -> json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, EuclideanBall>) {
                return {{"family", "ball"}, {"radius", f.radius}};
            } else if constexpr (std::is_same_v<T, PNormBall>) {
                return {{"family", "pball"}, {"p", f.p}, {"radius", f.radius}};
            } else if constexpr (std::is_same_v<T, Box>) {
                return {{"family", "box"}, {"half_widths", f.half_widths}};
            } else if constexpr (std::is_same_v<T, CrossPolytope>) {
                return {{"family", "cross"}, {"scale", f.scale}};
            } else {
                json hs = json::array();
                for (const auto& h : f.halfspaces) hs.push_back({{"normal", h.normal}, {"offset", h.offset}});
                return {{"family", "polytope"}, {"halfspaces", hs}};
            }
        },
        body.family());
}

ProblemSpec parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()) && i + 1 < e.byte; ++i) {
            if (text[i] == '\n') ++line;
        }
        throw Error("config: line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    allow_only(j, "", {"domain", "body", "formulation", "c", "k", "eta", "zero_order", "h", "solver", "seed", "h_list"});
    const DomainShape domain = domain_from_json(need(j, "", "domain"), "domain");
    const ConvexBody body = body_from_json(need(j, "", "body"), "body", domain.dimension());
    ProblemSpec s(domain, body);

    const auto& eta = need(j, "", "eta");
    bool vector_eta = false;
    if (eta.is_array()) {
        s.eta = numbers(eta, "eta");
        if (s.eta.empty()) fail("eta", "must not be empty");
        vector_eta = true;
    } else {
        s.eta = {number(eta, "eta")};
    }
    s.formulation = vector_eta ? Formulation::Vector : Formulation::Both;
    if (j.contains("formulation")) {
        const auto& f = j.at("formulation");
        if (!f.is_string()) fail("formulation", "expected a string");
        const std::string name = f.get<std::string>();
        if (name == "obstacle") s.formulation = Formulation::Obstacle;
        else if (name == "gradient") s.formulation = Formulation::Gradient;
        else if (name == "vector") s.formulation = Formulation::Vector;
        else if (name == "both") s.formulation = Formulation::Both;
        else fail("formulation", "unknown formulation '" + name + "'");
    }
    if (vector_eta && s.formulation != Formulation::Vector) fail("eta", "an eta vector requires formulation 'vector'");
    if (s.formulation == Formulation::Vector) {
        double n2 = 0.0;
        for (double e : s.eta) n2 += e * e;
        if (!(n2 > 0.0)) fail("eta", "must be nonzero for the vector formulation");
    }
    if (j.contains("c")) s.c = number(j.at("c"), "c");
    if (j.contains("k")) s.k = positive(j.at("k"), "k");
    if (j.contains("zero_order")) {
        const auto& z = j.at("zero_order");
        allow_only(z, "zero_order", {"kind", "a", "b"});
        const auto& kind = need(z, "zero_order", "kind");
        if (!kind.is_string()) fail("zero_order.kind", "expected a string");
        const std::string k = kind.get<std::string>();
        if (k == "linear") {
            if (z.contains("a") || z.contains("b")) fail("zero_order", "linear takes no coefficients");
        } else if (k == "quadratic" || k == "quartic") {
            s.zero_order.kind = k == "quadratic" ? ZeroOrderSpec::Kind::Quadratic : ZeroOrderSpec::Kind::Quartic;
            s.zero_order.a = z.contains("a") ? number(z.at("a"), "zero_order.a") : 0.0;
            s.zero_order.b = z.contains("b") ? number(z.at("b"), "zero_order.b") : 0.0;
            if (s.zero_order.a < 0.0) fail("zero_order.a", "must be nonnegative (g convex)");
        } else {
            fail("zero_order.kind", "unknown kind '" + k + "'");
        }
        if (s.formulation == Formulation::Vector && s.zero_order.kind != ZeroOrderSpec::Kind::Linear) {
            fail("zero_order", "the vector formulation supports only the linear term");
        }
    }
    const auto& h = need(j, "", "h");
    s.h = parse_spacing(h, "h");
    if (h.is_string()) s.h_text = h.get<std::string>();
    if (j.contains("solver")) {
        const auto& v = j.at("solver");
        allow_only(v, "solver", {"omega", "tol", "max_sweeps", "tol_act", "rho", "admm_tol", "max_iters"});
        if (v.contains("omega")) {
            s.solver.omega = number(v.at("omega"), "solver.omega");
            if (!(s.solver.omega > 0.0 && s.solver.omega < 2.0)) fail("solver.omega", "must lie in (0, 2)");
        }
        if (v.contains("tol")) s.solver.tol = positive(v.at("tol"), "solver.tol");
        if (v.contains("max_sweeps")) s.solver.max_sweeps = count(v.at("max_sweeps"), "solver.max_sweeps");
        if (v.contains("tol_act")) s.solver.tol_act = positive(v.at("tol_act"), "solver.tol_act");
        if (v.contains("rho")) s.solver.rho = positive(v.at("rho"), "solver.rho");
        if (v.contains("admm_tol")) s.solver.admm_tol = positive(v.at("admm_tol"), "solver.admm_tol");
        if (v.contains("max_iters")) s.solver.max_iters = count(v.at("max_iters"), "solver.max_iters");
    }
    if (j.contains("seed")) {
        const auto& sd = j.at("seed");
        if (!sd.is_number_unsigned() && !(sd.is_number_integer() && sd.get<long long>() >= 0)) {
            fail("seed", "expected a nonnegative integer");
        }
        s.seed = sd.get<std::uint64_t>();
    }
    if (j.contains("h_list")) {
        const auto& hl = j.at("h_list");
        if (!hl.is_array()) fail("h_list", "expected an array");
        for (std::size_t i = 0; i < hl.size(); ++i) {
            s.h_list.push_back(parse_spacing(hl[i], "h_list[" + std::to_string(i) + "]"));
        }
    }
    try {
        build_grid(s.domain, s.h);
    } catch (const Error& e) {
        fail("h", e.what());
    }
    return s;
}

ProblemSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

json to_json(const ProblemSpec& s) {
    json j;
    j["domain"] = domain_to_json(s.domain);
    j["body"] = body_to_json(s.body);
    j["formulation"] = formulation_name(s.formulation);
    j["c"] = s.c;
    j["k"] = s.k;
    if (s.formulation == Formulation::Vector) j["eta"] = s.eta;
    else j["eta"] = s.scalar_eta();
    json z{{"kind", zero_order_name(s.zero_order.kind)}};
    if (s.zero_order.kind != ZeroOrderSpec::Kind::Linear) {
        z["a"] = s.zero_order.a;
        z["b"] = s.zero_order.b;
    }
    j["zero_order"] = z;
    if (s.h_text.empty()) j["h"] = s.h;
    else j["h"] = s.h_text;
    j["solver"] = {{"omega", s.solver.omega},     {"tol", s.solver.tol},   {"max_sweeps", s.solver.max_sweeps},
                   {"tol_act", s.solver.tol_act}, {"rho", s.solver.rho},   {"admm_tol", s.solver.admm_tol},
                   {"max_iters", s.solver.max_iters}};
    j["seed"] = s.seed;
    j["h_list"] = s.h_list;
    return j;
}

std::string spec_hash(const ProblemSpec& spec) {
    const std::string text = to_json(spec).dump();
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace gradvi
