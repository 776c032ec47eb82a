#include "gradvi/runner.hpp"

#include "gradvi/distance.hpp"
#include "gradvi/error.hpp"
#include "gradvi/field_io.hpp"
#include "gradvi/kernels.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace gradvi {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

class Checks {
public:
    void add(const std::string& name, double value, double limit, bool pass) {
        checks_.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"pass", pass}});
        if (!pass) failures_.push_back(name);
    }
    void at_most(const std::string& name, double value, double limit) {
        add(name, value, limit, std::isfinite(value) && value <= limit);
    }
    void holds(const std::string& name, bool ok) { add(name, ok ? 1.0 : 0.0, 1.0, ok); }
    const json& list() const { return checks_; }
    const std::vector<std::string>& failures() const { return failures_; }

private:
    json checks_ = json::array();
    std::vector<std::string> failures_;
};

double obstacle_violation(const ScalarField& u, const ObstacleProblem& p) {
    double worst = 0.0;
    for (std::size_t i : p.grid->interior_nodes()) {
        worst = std::max({worst, p.lower.values[i] - u.values[i], u.values[i] - p.upper.values[i]});
    }
    return worst;
}

double l2_difference(const ScalarField& a, const ScalarField& b) {
    const Discretization disc(a.grid);
    double s = 0.0;
    for (std::size_t i : a.grid->interior_nodes()) s += disc.mass()[i] * (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    return std::sqrt(s);
}

ScalarField active_code(const ActiveSets& sets, const GridPtr& grid) {
    ScalarField f = ScalarField::zeros(grid);
    for (std::size_t i : grid->interior_nodes()) f.values[i] = sets.lower[i] ? -1.0 : (sets.upper[i] ? 1.0 : 0.0);
    return f;
}

json grid_json(const GridDomain& g) {
    return {{"h", g.h()},
            {"nx", g.nx()},
            {"ny", g.ny()},
            {"interior", g.count(NodeKind::Interior)},
            {"boundary", g.count(NodeKind::Boundary)}};
}

struct Writer {
    fs::path dir;
    bool enabled;
    void field(const std::string& name, const ScalarField& f) const {
        if (enabled) export_field(f, (dir / name).string());
    }
    void field(const std::string& name, const VectorField& f) const {
        if (enabled) export_field(f, (dir / name).string());
    }
    void text(const std::string& name, const std::string& body) const {
        if (!enabled) return;
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
        out << body;
    }
};

std::string residual_csv(const std::vector<ResidualSample>& log) {
    std::string out = "iteration,primal,dual\n";
    char buf[96];
    for (const auto& r : log) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.iteration, r.primal, r.dual);
        out += buf;
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

json regularity_json(const ScalarField& u, const ScalarField& dist, const ProblemSpec& spec, ScalarField* ratio) {
    const auto in = regularity_inputs(spec);
    const auto rep = bound_profile(u, dist, in.params, in.region_threshold);
    if (ratio) *ratio = rep.ratio;
    return {{"A", in.params.A},
            {"B", in.params.B},
            {"max_ratio", rep.max_ratio},
            {"region_threshold", rep.region_threshold},
            {"region_max_ratio", rep.region_max_ratio},
            {"region_max_second_difference", rep.region_max_second_difference},
            {"region_nodes", rep.region_nodes}};
}

void scalar_report(const ProblemSpec& spec, const ScalarRun& run, json& rep, Checks& checks, const Writer& out,
                   std::string& timing) {
    const double h = run.grid->h();
    const double lip_tol = 5.0 * h * h;
    const ConvexBody kpolar = polar(spec.body);
    const ZeroOrderTerm term = make_term(spec.zero_order, spec.scalar_eta());
    const Discretization disc(run.grid);
    rep["grid"] = grid_json(*run.grid);
    out.field("distance.csv", run.dist);
    if (run.psor) {
        const auto& r = *run.psor;
        const auto sets = active_sets(r.u, run.problem, spec.solver.tol_act);
        const auto kkt = kkt_residuals(r.u, run.problem, sets);
        const double viol = obstacle_violation(r.u, run.problem);
        const double lip = lipschitz_excess(r.u, kpolar, spec.k);
        const auto feas = feasibility_profile(r.u, spec.body, spec.k);
        rep["obstacle"] = {{"converged", r.stats.converged},
                           {"sweeps", r.stats.iterations},
                           {"fixed_point_residual", fixed_point_residual(run.problem, r.u)},
                           {"energy", discrete_energy(disc, r.u, spec.c, term)},
                           {"active", {{"lower", sets.lower_count}, {"upper", sets.upper_count}, {"elastic", sets.elastic_count}}},
                           {"kkt", {{"elastic_residual", kkt.elastic_residual}, {"lower_sign", kkt.lower_sign}, {"upper_sign", kkt.upper_sign}}},
                           {"obstacle_violation", viol},
                           {"lipschitz_excess", lip},
                           {"gradient_gauge_max", feas.max_ratio * spec.k}};
        checks.holds("obstacle.converged", r.stats.converged);
        checks.at_most("obstacle.obstacle_violation", viol, 1e-12);
        checks.at_most("obstacle.lipschitz_excess", lip, lip_tol);
        out.field("u_obstacle.csv", r.u);
        out.field("active.csv", active_code(sets, run.grid));
        timing += "psor_seconds=" + fmt(run.psor_seconds) + "\n";
    }
    if (run.admm) {
        const auto& r = *run.admm;
        const auto feas = feasibility_profile(r.u, spec.body, spec.k);
        const double lip = lipschitz_excess(r.u, kpolar, spec.k);
        json hist = json::array();
        for (auto c : feas.histogram) hist.push_back(c);
        rep["gradient"] = {{"converged", r.stats.converged},
                           {"iterations", r.stats.iterations},
                           {"interior_point_iterations", r.interior_iterations},
                           {"primal_residual", r.primal},
                           {"dual_residual", r.dual},
                           {"linear_residual", r.linear_residual},
                           {"projection_ok", r.projection_ok},
                           {"energy", discrete_energy(disc, r.u, spec.c, term)},
                           {"feasibility", {{"max_gauge", feas.max_ratio * spec.k}, {"histogram", hist}}},
                           {"obstacle_violation", obstacle_violation(r.u, run.problem)},
                           {"lipschitz_excess", lip}};
        checks.holds("gradient.converged", r.stats.converged && r.projection_ok);
        checks.at_most("gradient.feasibility", feas.max_ratio * spec.k, spec.k + 10.0 * spec.solver.admm_tol);
        checks.at_most("gradient.lipschitz_excess", lip, lip_tol);
        out.field("u_gradient.csv", r.u);
        out.text("residuals.csv", residual_csv(r.log));
        timing += "admm_seconds=" + fmt(run.admm_seconds) + "\n";
    }
    if (run.psor && run.admm) {
        const double sup = sup_difference(run.psor->u, run.admm->u);
        const double e1 = discrete_energy(disc, run.psor->u, spec.c, term);
        const double e2 = discrete_energy(disc, run.admm->u, spec.c, term);
        rep["equivalence"] = {{"sup_difference", sup},
                              {"l2_difference", l2_difference(run.psor->u, run.admm->u)},
                              {"bound", 5.0 * h},
                              {"energy_difference", e2 - e1},
                              {"energy_constant", (e2 - e1) / (h * h)}};
        checks.at_most("equivalence.sup_difference", sup, 5.0 * h);
    }
    const ScalarField& u = run.psor ? run.psor->u : run.admm->u;
    ScalarField ratio;
    rep["regularity"] = regularity_json(u, run.dist, spec, &ratio);
    out.field("ratio.csv", ratio);
}

void vector_report(const ProblemSpec& spec, const VectorRun& run, json& rep, Checks& checks, const Writer& out,
                   std::string& timing) {
    const double h = run.grid->h();
    const auto& u = run.reduced.psor->u;
    const double ih = vector_energy(run.assembled, spec.eta);
    const double j1 = j1_energy(u);
    double eta2 = 0.0;
    for (double e : spec.eta) eta2 += e * e;
    const double identity = std::abs(ih - eta2 * j1) / std::max(std::abs(ih), std::numeric_limits<double>::min());
    double invariance = 0.0;
    for (std::uint64_t t = 0; t < 20; ++t) {
        const auto T = random_orthogonal_fixing(spec.eta, spec.seed * 1000 + t);
        invariance = std::max(invariance, invariance_check(run.assembled, spec.eta, T) /
                                              std::max(std::abs(ih), std::numeric_limits<double>::min()));
    }
    const auto k1 = k1_feasibility(run.assembled, spec.body);
    const auto& pr = *run.reduced.psor;
    rep["grid"] = grid_json(*run.grid);
    rep["reduced"] = {{"converged", pr.stats.converged},
                      {"sweeps", pr.stats.iterations},
                      {"bound", 1.0 / std::sqrt(eta2)},
                      {"j1_energy", j1}};
    rep["assembled"] = {{"energy", ih},
                        {"energy_identity_error", identity},
                        {"invariance_max_relative", invariance},
                        {"k1_max", k1.max_norm}};
    checks.holds("reduced.converged", pr.stats.converged);
    checks.at_most("assembled.energy_identity", identity, 1e-10);
    checks.at_most("assembled.invariance", invariance, 1e-10);
    checks.at_most("assembled.k1_feasibility", k1.max_norm, 1.0 + 10.0 * h);
    out.field("u_scalar.csv", u);
    out.field("v_assembled.csv", run.assembled);
    timing += "reduced_seconds=" + fmt(run.reduced.psor_seconds) + "\n";
    if (run.direct) {
        const auto& d = *run.direct;
        const double sup = sup_difference(d.v, run.assembled);
        const double angle = collinearity_angle(d.v, spec.eta);
        const auto k1d = k1_feasibility(d.v, spec.body);
        rep["direct"] = {{"converged", d.stats.converged},
                         {"iterations", d.stats.iterations},
                         {"primal_residual", d.primal},
                         {"dual_residual", d.dual},
                         {"energy", vector_energy(d.v, spec.eta)},
                         {"sup_difference", sup},
                         {"collinearity_angle", angle},
                         {"k1_max", k1d.max_norm}};
        checks.holds("direct.converged", d.stats.converged);
        checks.at_most("direct.sup_difference", sup, 5.0 * h);
        checks.at_most("direct.collinearity", angle, 10.0 * h);
        checks.at_most("direct.k1_feasibility", k1d.max_norm, 1.0 + 10.0 * spec.solver.admm_tol);
        out.field("v_direct.csv", d.v);
        out.text("residuals.csv", residual_csv(d.log));
        timing += "direct_seconds=" + fmt(run.direct_seconds) + "\n";
    }
}

}  // namespace

ScalarRun solve_scalar(const ProblemSpec& spec, bool obstacle, bool gradient) {
    ScalarRun run;
    run.grid = build_grid(spec.domain, spec.h);
    run.dist = gauge_distance_map(run.grid, polar(spec.body));
    auto [lo, hi] = build_obstacles(run.dist, spec.c, spec.k);
    const ZeroOrderTerm term = make_term(spec.zero_order, spec.scalar_eta());
    run.problem = ObstacleProblem{run.grid, std::move(lo), std::move(hi), spec.c, term};
    if (term.g) {
        double lo_v = spec.c, hi_v = spec.c;
        for (std::size_t i : run.grid->interior_nodes()) {
            lo_v = std::min(lo_v, run.problem.lower.values[i]);
            hi_v = std::max(hi_v, run.problem.upper.values[i]);
        }
        if (hi_v > lo_v) certify_convexity(term, lo_v, hi_v);
    }
    if (obstacle) {
        const auto t0 = std::chrono::steady_clock::now();
        run.psor = psor_solve(run.problem, {spec.solver.omega, spec.solver.tol, spec.solver.max_sweeps, false});
        run.psor_seconds = seconds_since(t0);
    }
    if (gradient) {
        const auto t0 = std::chrono::steady_clock::now();
        run.admm = admm_solve(GradientProblem{run.grid, spec.body, spec.k, spec.c, term},
                              {spec.solver.rho, spec.solver.admm_tol, spec.solver.max_iters, true});
        run.admm_seconds = seconds_since(t0);
    }
    return run;
}

VectorRun solve_vector(const ProblemSpec& spec, bool direct) {
    VectorRun run;
    run.reduced = solve_scalar(reduce_to_scalar(spec), true, false);
    run.grid = run.reduced.grid;
    run.assembled = assemble_vector(run.reduced.psor->u, spec.eta);
    const bool ball = spec.body.is<EuclideanBall>() || (spec.body.is<PNormBall>() && spec.body.as<PNormBall>().p == 2.0);
    if (direct && ball) {
        const auto t0 = std::chrono::steady_clock::now();
        run.direct = direct_vector_solve(VectorProblem{run.grid, spec.body, spec.eta},
                                         {spec.solver.rho, spec.solver.admm_tol, spec.solver.max_iters, true});
        run.direct_seconds = seconds_since(t0);
    }
    return run;
}

double sup_difference(const ScalarField& a, const ScalarField& b) {
    if (a.values.size() != b.values.size()) throw Error("sup_difference: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.grid && a.grid->kind(i) == NodeKind::Exterior) continue;
        s = std::max(s, std::abs(a.values[i] - b.values[i]));
    }
    return s;
}

double sup_difference(const VectorField& a, const VectorField& b) {
    if (a.size() != b.size()) throw Error("sup_difference: component count mismatch");
    double s = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        s = std::max(s, sup_difference(ScalarField{a.grid, a.components[l]}, ScalarField{b.grid, b.components[l]}));
    }
    return s;
}

RegularityInputs regularity_inputs(const ProblemSpec& spec) {
    const ConvexBody kpolar = polar(spec.body);
    RegularityInputs in;
    in.params.A = estimate_A(kpolar);
    in.params.B = estimate_B(kpolar, 10000, spec.seed).value;
    in.params.k = spec.k;
    in.params.c = spec.c;
    in.params.eta = spec.scalar_eta();
    in.region_threshold = 0.1 * spec.domain.gauge_diameter(kpolar);
    return in;
}

std::vector<RefinementRow> refinement_study(const ProblemSpec& spec, const std::vector<double>& hs) {
    const auto in = regularity_inputs(spec);
    const bool gradient = spec.formulation == Formulation::Gradient;
    std::vector<RefinementRow> rows;
    for (double h : hs) {
        ProblemSpec s = spec;
        s.h = h;
        s.h_text.clear();
        const auto run = solve_scalar(s, !gradient, gradient);
        const bool ok = gradient ? run.admm->stats.converged : run.psor->stats.converged;
        if (!ok) throw Error("refinement_study: solver did not converge at h = " + std::to_string(h));
        const ScalarField& u = gradient ? run.admm->u : run.psor->u;
        const auto rep = bound_profile(u, run.dist, in.params, in.region_threshold);
        rows.push_back({h, rep.region_max_second_difference, rep.region_max_ratio, rep.region_nodes});
    }
    return rows;
}

const char* command_name(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Equivalence: return "equivalence";
        case Command::Vector: return "vector";
        case Command::Regularity: return "regularity";
        case Command::Distance: return "distance";
    }
    return "solve";
}

RunOutcome run(Command command, ProblemSpec spec, const RunOptions& options) {
    if (!options.h_list.empty()) spec.h_list = options.h_list;
    if (command == Command::Equivalence) {
        if (spec.formulation == Formulation::Vector) throw Error("equivalence: needs a scalar problem");
        spec.formulation = Formulation::Both;
    }
    if (command == Command::Vector) {
        if (spec.formulation != Formulation::Vector) {
            spec.formulation = Formulation::Vector;
            if (spec.zero_order.kind != ZeroOrderSpec::Kind::Linear) throw Error("vector: needs the linear zero-order term");
        }
        double n2 = 0.0;
        for (double e : spec.eta) n2 += e * e;
        if (!(n2 > 0.0)) throw Error("vector: eta must be nonzero");
    }
    if ((command == Command::Regularity || command == Command::Distance) && spec.formulation == Formulation::Vector) {
        throw Error(std::string(command_name(command)) + ": needs a scalar problem");
    }

    RunOutcome outcome;
    const std::string hash = spec_hash(spec);
    const fs::path dir = fs::path(options.out_dir) / (std::string(command_name(command)) + "-" + hash);
    if (options.write_files) fs::create_directories(dir);
    outcome.run_dir = dir.string();
    const Writer out{dir, options.write_files};

    json rep;
    rep["command"] = command_name(command);
    rep["spec"] = to_json(spec);
    rep["spec_hash"] = hash;
    Checks checks;
    std::string timing = std::string("isa=") + kernels::isa_name(kernels::active_isa()) + "\n";
    const auto t0 = std::chrono::steady_clock::now();

    switch (command) {
        case Command::Solve:
        case Command::Equivalence: {
            if (spec.formulation == Formulation::Vector) {
                const auto run = solve_vector(spec, true);
                vector_report(spec, run, rep, checks, out, timing);
            } else {
                const bool obstacle = spec.formulation != Formulation::Gradient;
                const bool gradient = spec.formulation != Formulation::Obstacle;
                const auto run = solve_scalar(spec, obstacle, gradient);
                scalar_report(spec, run, rep, checks, out, timing);
            }
            break;
        }
        case Command::Vector: {
            const auto run = solve_vector(spec, true);
            vector_report(spec, run, rep, checks, out, timing);
            break;
        }
        case Command::Regularity: {
            std::vector<double> hs = spec.h_list;
            if (hs.empty()) hs = {spec.h, spec.h / 2.0};
            const auto rows = refinement_study(spec, hs);
            const auto in = regularity_inputs(spec);
            json table = json::array();
            std::string csv = "h,max_second_difference,max_ratio,nodes\n";
            char buf[128];
            for (std::size_t i = 0; i < rows.size(); ++i) {
                json row{{"h", rows[i].h},
                         {"max_second_difference", rows[i].max_second_difference},
                         {"max_ratio", rows[i].max_ratio},
                         {"nodes", rows[i].nodes}};
                if (i > 0) {
                    const double change = std::abs(rows[i].max_ratio - rows[i - 1].max_ratio) /
                                          std::max(rows[i - 1].max_ratio, std::numeric_limits<double>::min());
                    row["relative_change"] = change;
                    checks.at_most("regularity.change_" + std::to_string(i), change, 0.15);
                }
                checks.holds("regularity.nonempty_region_" + std::to_string(i), rows[i].nodes > 0);
                table.push_back(row);
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%zu\n", rows[i].h, rows[i].max_second_difference,
                              rows[i].max_ratio, rows[i].nodes);
                csv += buf;
            }
            rep["regularity"] = {{"A", in.params.A},
                                 {"B", in.params.B},
                                 {"region_threshold", in.region_threshold},
                                 {"table", table}};
            out.text("refinement.csv", csv);
            break;
        }
        case Command::Distance: {
            const auto grid = build_grid(spec.domain, spec.h);
            const ConvexBody kpolar = polar(spec.body);
            const auto dist = gauge_distance_map(grid, kpolar);
            double dmax = 0.0;
            bool positive = true;
            for (std::size_t i : grid->interior_nodes()) {
                dmax = std::max(dmax, dist.values[i]);
                positive = positive && dist.values[i] > 0.0;
            }
            const double lip = lipschitz_excess(dist, kpolar, 1.0);
            rep["grid"] = grid_json(*grid);
            rep["distance"] = {{"max", dmax}, {"lipschitz_excess", lip}};
            checks.holds("distance.positive_inside", positive);
            checks.at_most("distance.lipschitz_excess", lip, 1e-9);
            out.field("distance.csv", dist);
            break;
        }
    }
    timing += "total_seconds=" + fmt(seconds_since(t0)) + "\n";
    rep["checks"] = checks.list();
    outcome.failures = checks.failures();
    outcome.passed = outcome.failures.empty();
    rep["passed"] = outcome.passed;
    outcome.report = rep;
    out.text("report.json", rep.dump(2) + "\n");
    out.text("timing.txt", timing);
    return outcome;
}

}  // namespace gradvi
