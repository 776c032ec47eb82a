// Acceptance run: one PASS/FAIL line per criterion, indented detail lines
// under it. Exits 1 if any criterion fails.

#include "gradvi/distance.hpp"
#include "gradvi/projection.hpp"
#include "gradvi/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gradvi;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    return buf;
}

int failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void note(const std::string& text) {
    std::printf("    %s\n", text.c_str());
    std::fflush(stdout);
}

ProblemSpec scalar_spec(DomainShape domain, ConvexBody body, double eta, double h) {
    ProblemSpec s(std::move(domain), std::move(body));
    s.eta = {eta};
    s.h = h;
    return s;
}

// Outputs kept for the feasibility and Lipschitz criterion.
struct Output {
    std::string label;
    ScalarField u;
    ConvexBody body;
    double k;
    bool constrained;  // produced by the gradient-constrained solver
};
std::vector<Output> outputs;
double vector_k1 = INFINITY;  // max ||Dv||_{2,K} of the direct vector solution

// 1. 1-D elastic-plastic torsion against the closed form.
void torsion() {
    const double h = 1.0 / 512.0;
    auto spec = scalar_spec(DomainShape::interval(-1, 1), ConvexBody::euclidean_ball(1, 1.0), 4.0, h);
    const auto t0 = Clock::now();
    const auto run = solve_scalar(spec, true, false);
    const double secs = since(t0);
    const auto& u = run.psor->u;
    const auto& g = *run.grid;
    double err = 0.0;
    for (std::size_t i : g.interior_nodes()) {
        const double x = g.coord(i)[0];
        const double exact = std::abs(x) >= 0.25 ? 1.0 - std::abs(x) : 0.875 - 2.0 * x * x;
        err = std::max(err, std::abs(u.values[i] - exact));
    }
    const auto sets = active_sets(u, run.problem, spec.solver.tol_act);
    double right = INFINITY, left = -INFINITY;
    for (std::size_t i : g.interior_nodes()) {
        if (!sets.upper[i]) continue;
        const double x = g.coord(i)[0];
        if (x > 0.0) right = std::min(right, x);
        else left = std::max(left, x);
    }
    const double fb = std::max(std::abs(right - 0.25), std::abs(left + 0.25));
    outputs.push_back({"torsion psor", u, spec.body, 1.0, false});
    const bool pass = run.psor->stats.converged && err <= 2e-3 && fb <= 2.0 * h && secs < 5.0;
    verdict(1, "1-D torsion", pass,
            format("sup error %.3g (<= 2e-3), plastic boundary off by %.3g (<= %.3g), %.2f s (< 5 s)", err, fb,
                   2.0 * h, secs));
}

// 2. Obstacle and gradient-constrained solutions agree on the 9-case matrix.
void equivalence() {
    const double h = 1.0 / 128.0;
    const auto t0 = Clock::now();
    bool pass = true, converged = true;
    double worst = 0.0;
    for (const auto& domain : {DomainShape::interval(-1, 1), DomainShape::rectangle(0, 0, 1, 1), DomainShape::disk(0, 0, 1)}) {
        const std::size_t n = domain.dimension();
        const std::vector<ConvexBody> bodies{ConvexBody::euclidean_ball(n, 1.0),
                                             ConvexBody::box(std::vector<double>(n, 1.0)),
                                             ConvexBody::pnorm_ball(n, 3.0, 1.0)};
        for (const auto& body : bodies) {
            const auto spec = scalar_spec(domain, body, 4.0, h);
            const auto t1 = Clock::now();
            const auto run = solve_scalar(spec, true, true);
            const double sup = sup_difference(run.psor->u, run.admm->u);
            const bool ok = run.psor->stats.converged && run.admm->stats.converged && sup <= 5.0 * h;
            pass = pass && ok;
            converged = converged && run.psor->stats.converged && run.admm->stats.converged;
            worst = std::max(worst, sup);
            const std::string label = domain.descriptor() + " " + body.family_name();
            note(format("%-24s sup %.3g, psor %zu sweeps, admm %zu iterations (%zu interior-point), %.1f s %s",
                        label.c_str(), sup, run.psor->stats.iterations, run.admm->stats.iterations,
                        run.admm->interior_iterations, since(t1), ok ? "" : "<- fails"));
            outputs.push_back({label + " psor", run.psor->u, body, 1.0, false});
            outputs.push_back({label + " admm", run.admm->u, body, 1.0, true});
        }
    }
    const double secs = since(t0);
    pass = pass && secs < 600.0;
    verdict(2, "scalar equivalence", pass,
            format("worst sup difference %.3g (<= 5h = %.3g), all converged: %s, %.1f s (< 600 s)", worst, 5.0 * h,
                   converged ? "yes" : "no", secs));
}

// 3 and 4. Vector problem against the reduced scalar one; invariance.
void vector_reduction() {
    const double h = 1.0 / 64.0;
    ProblemSpec spec(DomainShape::rectangle(0, 0, 1, 1), ConvexBody::euclidean_ball(2, 1.0));
    spec.eta = {3.0, 4.0};
    spec.h = h;
    spec.formulation = Formulation::Vector;
    const auto run = solve_vector(spec, true);
    const auto& d = *run.direct;
    const double sup = sup_difference(d.v, run.assembled);
    const double angle = collinearity_angle(d.v, spec.eta);
    const double ih = vector_energy(run.assembled, spec.eta);
    const double identity = std::abs(ih - 25.0 * j1_energy(run.reduced.psor->u)) / std::abs(ih);
    vector_k1 = k1_feasibility(d.v, spec.body).max_norm;
    const bool pass = run.reduced.psor->stats.converged && d.stats.converged && sup <= 5.0 * h && angle <= 10.0 * h &&
                      identity <= 1e-10;
    verdict(3, "vector reduction", pass,
            format("sup %.3g (<= %.3g), angle %.3g rad (<= %.3g), energy identity %.3g (<= 1e-10), %zu iterations",
                   sup, 5.0 * h, angle, 10.0 * h, identity, d.stats.iterations));

    double worst = 0.0;
    for (const auto* v : {&run.assembled, &d.v}) {
        const double e = std::abs(vector_energy(*v, spec.eta));
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            worst = std::max(worst, invariance_check(*v, spec.eta, random_orthogonal_fixing(spec.eta, seed)) / e);
        }
    }
    verdict(4, "orthogonal invariance", worst <= 1e-10,
            format("max relative energy change %.3g over 20 rotations, two fields (<= 1e-10)", worst));
}

// 5. Interior second differences stay bounded under refinement.
void regularity() {
    auto square = scalar_spec(DomainShape::rectangle(0, 0, 1, 1), ConvexBody::euclidean_ball(2, 1.0), 8.0, 1.0 / 64.0);
    square.formulation = Formulation::Obstacle;
    auto line = scalar_spec(DomainShape::interval(-1, 1), ConvexBody::euclidean_ball(1, 1.0), 4.0, 1.0 / 64.0);
    line.formulation = Formulation::Obstacle;
    bool pass = true;
    double worst = 0.0;
    for (const auto& [spec, hs] : {std::pair{square, std::vector<double>{1.0 / 64, 1.0 / 128}},
                                   std::pair{line, std::vector<double>{1.0 / 64, 1.0 / 128, 1.0 / 256}}}) {
        const auto rows = refinement_study(spec, hs);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::string text = format("%s h=1/%.0f: max ratio %.6g, max second difference %.6g, h^-2 = %.0f",
                                      spec.domain.descriptor().c_str(), 1.0 / rows[i].h, rows[i].max_ratio,
                                      rows[i].max_second_difference, 1.0 / (rows[i].h * rows[i].h));
            if (i > 0) {
                const double change = std::abs(rows[i].max_ratio - rows[i - 1].max_ratio) / rows[i - 1].max_ratio;
                worst = std::max(worst, change);
                pass = pass && change <= 0.15 && rows[i].nodes > 0;
                text += format(", change %.3g", change);
            }
            note(text);
        }
    }
    verdict(5, "regularity bound", pass, format("largest ratio change per halving %.3g (<= 0.15)", worst));
}

// 6. The p-norm second-difference lemma on random admissible triples.
void pnorm_lemma() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t violations = 0, total = 0;
    double margin = -INFINITY;
    for (double p : {2.0, 3.0, 4.0, 6.0}) {
        const auto body = ConvexBody::pnorm_ball(2, p, 1.0);
        for (std::size_t n = 0; n < 10000;) {
            Point x{normal(rng), normal(rng)}, z{normal(rng), normal(rng)};
            const double scale = std::exp(2.0 * normal(rng));
            for (auto& v : x) v *= scale;
            const double gz = gauge_eval(body, z);
            for (auto& v : z) v /= gz;
            const double gx = gauge_eval(body, x);
            const double h = unit(rng) * gx;
            if (!(h > 0.0 && h < gx)) continue;
            ++n;
            ++total;
            const double lhs = second_difference_gauge(body, x, z, h);
            const double rhs = pnorm_b_constant(p) / (gx - h);
            margin = std::max(margin, (lhs - rhs) / rhs);
            if (lhs > rhs + 1e-9) ++violations;
        }
    }
    verdict(6, "p-norm second-difference lemma", violations == 0,
            format("%zu violations in %zu triples (p = 2, 3, 4, 6), largest (lhs - rhs)/rhs %.3g", violations, total,
                   margin));
}

// Nearest point of k K by exhaustive lattice search, pulled radially into k K
// and refined tenfold per level around the incumbent.
Point lattice_projection(const ConvexBody& body, double k, const Point& p) {
    double cx = 0.0, cy = 0.0, step = 4.0 * k / 200.0;
    for (int level = 0; level < 6; ++level) {
        double best = INFINITY, bx = cx, by = cy;
        for (int i = -200; i <= 200; ++i) {
            for (int j = -200; j <= 200; ++j) {
                Point q{cx + i * step, cy + j * step};
                const double g = gauge_eval(body, q);
                if (g > k) {
                    q[0] *= k / g;
                    q[1] *= k / g;
                }
                const double d = std::hypot(q[0] - p[0], q[1] - p[1]);
                if (d < best) {
                    best = d;
                    bx = q[0];
                    by = q[1];
                }
            }
        }
        cx = bx;
        cy = by;
        step /= 10.0;
    }
    return {cx, cy};
}

double distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// 7. Gauge layer identities and projections.
void gauge_layer() {
    std::vector<Halfspace> hex;
    for (int i = 0; i < 6; ++i) {
        const double a = M_PI / 3.0 * i + 0.2;
        hex.push_back({{std::cos(a), std::sin(a)}, 0.8 + 0.1 * (i % 3)});
    }
    const std::vector<ConvexBody> families{
        ConvexBody::euclidean_ball(2, 1.5),  ConvexBody::pnorm_ball(2, 3.0, 0.8), ConvexBody::pnorm_ball(2, 1.5, 1.2),
        ConvexBody::pnorm_ball(2, 1.0, 1.0), ConvexBody::box({1.0, 0.5}),         ConvexBody::cross_polytope(2, 2.0),
        ConvexBody::polytope(hex),           ConvexBody::euclidean_ball(3, 0.7),  ConvexBody::pnorm_ball(3, 4.0, 1.0),
        ConvexBody::box({0.5, 1.0, 2.0})};
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 2.0);
    auto random_point = [&](std::size_t dim) {
        Point x(dim);
        for (auto& v : x) v = normal(rng);
        return x;
    };
    double duality = 0.0, bipolar = 0.0, idempotence = 0.0, oracle = 0.0;
    bool converged = true;
    for (const auto& body : families) {
        const std::size_t dim = body.dimension();
        for (int i = 0; i < 10000; ++i) {
            const Point x = random_point(dim), y = random_point(dim);
            const double scale = gauge_eval(body, x) * polar_gauge(body, y);
            duality = std::max(duality, -duality_gap(body, x, y) / scale);
        }
        const auto twice = polar(polar(body));
        for (int i = 0; i < 1000; ++i) {
            const Point x = random_point(dim);
            const double g = gauge_eval(body, x);
            bipolar = std::max(bipolar, std::abs(gauge_eval(twice, x) - g) / (1.0 + g));
            const auto once = project_gradient(x, body, 0.7);
            const auto again = project_gradient(once.point, body, 0.7);
            converged = converged && once.converged && again.converged;
            idempotence = std::max(idempotence, distance(once.point, again.point));
        }
    }
    for (const auto& body : {ConvexBody::polytope(hex), families[6]}) {
        for (int i = 0; i < 20; ++i) {
            const Point p = random_point(2);
            const auto r = project_gradient(p, body, 1.3);
            converged = converged && r.converged;
            oracle = std::max(oracle, distance(r.point, lattice_projection(body, 1.3, p)));
        }
    }
    const bool pass = duality <= 1e-12 && bipolar <= 1e-10 && idempotence <= 1e-12 && oracle <= 1e-4 && converged;
    verdict(7, "gauge layer", pass,
            format("duality excess %.3g (<= 1e-12 relative), bipolar %.3g (<= 1e-10), idempotence %.3g (<= 1e-12), "
                   "Dykstra vs lattice %.3g (<= 1e-4)",
                   duality, bipolar, idempotence, oracle));
}

// 8. Gradient feasibility of constrained outputs, Lipschitz bound for all.
void feasibility() {
    const double tol = 1e-8;
    bool pass = vector_k1 <= 1.0 + 10.0 * tol;
    double worst_gauge = 0.0, worst_lip = -INFINITY, psor_gauge = 0.0;
    for (const auto& o : outputs) {
        const double h = o.u.grid->h();
        const double gauge = feasibility_profile(o.u, o.body, o.k).max_ratio * o.k;
        const double lip = lipschitz_excess(o.u, polar(o.body), o.k);
        if (o.constrained) {
            worst_gauge = std::max(worst_gauge, gauge - o.k);
            pass = pass && gauge <= o.k + 10.0 * tol;
        } else {
            psor_gauge = std::max(psor_gauge, gauge - o.k);
        }
        worst_lip = std::max(worst_lip, lip / (5.0 * h * h));
        if (lip > 5.0 * h * h) {
            pass = false;
            note(format("%s: Lipschitz excess %.3g > 5h^2", o.label.c_str(), lip));
        }
    }
    note(format("obstacle-solver outputs, for reference: max gamma_K(grad u) - k = %.3g", psor_gauge));
    verdict(8, "feasibility and Lipschitz", pass,
            format("%zu fields; max gamma_K(grad u) - k = %.3g (<= 10 tol) on constrained outputs, "
                   "direct vector ||Dv||_{2,K} - 1 = %.3g, Lipschitz excess / 5h^2 <= %.3g (<= 1)",
                   outputs.size(), worst_gauge, vector_k1 - 1.0, worst_lip));
}

std::map<std::string, std::string> files_of(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "timing.txt") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[fs::relative(e.path(), dir).string()] = ss.str();
    }
    return out;
}

// 9. Repeated runs write byte-identical artifacts (timing.txt excepted).
void determinism() {
    const auto root = fs::temp_directory_path() / "gradvi_acceptance";
    fs::remove_all(root);
    auto solve = scalar_spec(DomainShape::rectangle(0, 0, 1, 1), ConvexBody::pnorm_ball(2, 3.0, 1.0), 4.0, 1.0 / 32.0);
    auto disk = scalar_spec(DomainShape::disk(0, 0, 1), ConvexBody::euclidean_ball(2, 1.0), 4.0, 1.0 / 32.0);
    auto line = scalar_spec(DomainShape::interval(-1, 1), ConvexBody::euclidean_ball(1, 1.0), 4.0, 1.0 / 64.0);
    std::vector<Halfspace> hex;
    for (int i = 0; i < 6; ++i) hex.push_back({{std::cos(M_PI / 3.0 * i), std::sin(M_PI / 3.0 * i)}, 1.0});
    auto poly = scalar_spec(DomainShape::rectangle(0, 0, 1, 1), ConvexBody::polytope(hex), 2.0, 1.0 / 32.0);
    ProblemSpec vec(DomainShape::rectangle(0, 0, 1, 1), ConvexBody::euclidean_ball(2, 1.0));
    vec.eta = {3.0, 4.0};
    vec.h = 1.0 / 32.0;
    vec.formulation = Formulation::Vector;
    vec.seed = 5;
    const std::vector<std::pair<Command, ProblemSpec>> runs{
        {Command::Solve, solve},       {Command::Equivalence, disk}, {Command::Vector, vec},
        {Command::Regularity, line},   {Command::Distance, poly},
    };
    for (const char* pass : {"a", "b"}) {
        RunOptions opt;
        opt.out_dir = (root / pass).string();
        for (const auto& [cmd, spec] : runs) run(cmd, spec, opt);
    }
    const auto a = files_of(root / "a"), b = files_of(root / "b");
    std::size_t differing = 0;
    for (const auto& [name, body] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != body) {
            ++differing;
            note("differs: " + name);
        }
    }
    const bool pass = a.size() == b.size() && differing == 0 && a.size() >= 5 * 3;
    verdict(9, "determinism", pass,
            format("%zu artifacts from %zu runs compared byte for byte, %zu differ", a.size(), runs.size(), differing));
    fs::remove_all(root);
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    torsion();
    equivalence();
    vector_reduction();
    regularity();
    pnorm_lemma();
    gauge_layer();
    feasibility();
    determinism();
    std::printf("%d of 9 criteria failed, %.1f s\n", failures, since(t0));
    return failures == 0 ? 0 : 1;
}
