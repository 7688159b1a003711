// pursuit-lab: command-line front end for the pursuit/evasion library.
// Subcommands mirror the library's experiments; outputs are CSV or JSON
// (written atomically), with an optional SVG polyline plot.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "plab/analysis.hpp"
#include "plab/curves.hpp"
#include "plab/dynsys.hpp"
#include "plab/errors.hpp"
#include "plab/io.hpp"
#include "plab/ode.hpp"
#include "plab/pursuit.hpp"

using nlohmann::json;
using namespace plab;

namespace {

constexpr double nan_marker = std::numeric_limits<double>::quiet_NaN();

struct RunConfig {
    std::string command;
    double n = 0.5;
    double a = 1.0;
    double b = 0.5;
    std::string param = "standard";
    double t0 = nan_marker;
    double t1 = nan_marker;
    std::string method = "adaptive";
    double step = defaults::fixed_step;
    double tol = defaults::rel_tol;
    double p0x = 0.0;
    double p0y = 0.0;
    double rho0 = 1.0;
    double zeta0 = pi / 2.0;
    double phi0 = pi / 2.0;
    double zeta_p0 = nan_marker;   ///< derived from rho0 unless given
    double capture_eps = defaults::capture_eps;
    double anchor_step = pi / 2.0;
    double pass_tol = 1e-3;
    double section = pi / 2.0;
    double cycle_tol = 1e-3;
    std::string output;
    std::string format = "csv";
    std::string svg;
    std::string config_path;
};

Parameterization parse_param(const std::string& s) {
    if (s == "standard") return Parameterization::standard;
    if (s == "angvel") return Parameterization::angvel;
    if (s == "arclen") return Parameterization::arclen;
    if (s == "circle") return Parameterization::circle;
    throw std::invalid_argument("unknown parameterization '" + s + "'");
}

IntegratorSettings settings_from(const RunConfig& cfg) {
    IntegratorSettings st;
    if (cfg.method == "fixed") {
        st.method = IntegratorSettings::Method::fixed;
        st.step = cfg.step;
    } else if (cfg.method == "adaptive") {
        st.method = IntegratorSettings::Method::adaptive;
        st.rel_tol = cfg.tol;
        st.abs_tol = cfg.tol * 1e-3;
    } else {
        throw std::invalid_argument("method must be 'fixed' or 'adaptive'");
    }
    return st;
}

unsigned thread_cap() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned cap = std::min(3u, hw);
    if (const char* env = std::getenv("PURSUIT_LAB_THREADS")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v >= 1) cap = static_cast<unsigned>(std::min<unsigned long>(v, 64));
    }
    return cap;
}

std::string output_path(const RunConfig& cfg) {
    if (!cfg.output.empty()) return cfg.output;
    return cfg.command + (cfg.format == "json" ? ".json" : ".csv");
}

void write_json_file(const std::string& path, const json& j) {
    io::AtomicFile file(path);
    file.stream() << j.dump(2) << '\n';
    file.commit();
}

json capture_json(const std::optional<CaptureEvent>& cap) {
    if (!cap) return nullptr;
    return json{{"param", cap->param}, {"x", cap->position.x}, {"y", cap->position.y}};
}

// Pulls --config out of argv before CLI11 runs, so file values act as
// defaults and explicit flags keep precedence.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

void apply_json_config(const std::string& path, RunConfig& cfg) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read config file '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
    auto num = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    auto str = [&](const char* key, std::string& field) {
        if (j.contains(key)) field = j.at(key).get<std::string>();
    };
    try {
        num("n", cfg.n);
        num("a", cfg.a);
        num("b", cfg.b);
        str("param", cfg.param);
        num("t0", cfg.t0);
        num("t1", cfg.t1);
        str("method", cfg.method);
        num("step", cfg.step);
        num("tol", cfg.tol);
        num("p0x", cfg.p0x);
        num("p0y", cfg.p0y);
        num("rho0", cfg.rho0);
        num("zeta0", cfg.zeta0);
        num("phi0", cfg.phi0);
        num("zeta_p0", cfg.zeta_p0);
        num("capture_eps", cfg.capture_eps);
        num("anchor_step", cfg.anchor_step);
        num("pass_tol", cfg.pass_tol);
        num("section", cfg.section);
        num("cycle_tol", cfg.cycle_tol);
        str("output", cfg.output);
        str("format", cfg.format);
        str("svg", cfg.svg);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------

int run_simulate(RunConfig cfg) {
    const Parameterization p = parse_param(cfg.param);
    EllipseShape shape{cfg.a, cfg.b};
    if (p == Parameterization::circle && cfg.a != cfg.b)
        throw std::invalid_argument("--param circle requires a == b");

    PursuitConfig pc;
    pc.n = cfg.n;
    pc.p0 = {cfg.p0x, cfg.p0y};
    pc.param0 = std::isnan(cfg.t0) ? curve_param_start(p) : cfg.t0;
    pc.param1 = std::isnan(cfg.t1) ? pc.param0 + orbit_param_span(p, shape) : cfg.t1;
    pc.capture_eps = cfg.capture_eps;

    const PursuitResult res = simulate_pursuit(make_curve(p, shape), pc, settings_from(cfg));

    const std::string out = output_path(cfg);
    if (cfg.format == "json") {
        json rows = json::array();
        for (const auto& s : res.samples)
            rows.push_back({s.param, s.evader.x, s.evader.y, s.pursuer.x, s.pursuer.y, s.rho,
                            s.lambda});
        write_json_file(out, json{{"command", "simulate"},
                                  {"n", cfg.n},
                                  {"a", cfg.a},
                                  {"b", cfg.b},
                                  {"param", cfg.param},
                                  {"t0", pc.param0},
                                  {"t1", pc.param1},
                                  {"columns",
                                   {"param", "evader_x", "evader_y", "pursuer_x", "pursuer_y",
                                    "rho", "lambda"}},
                                  {"rows", rows},
                                  {"capture", capture_json(res.capture)}});
    } else {
        io::write_simulate_csv(out, res.samples);
    }
    if (!cfg.svg.empty()) {
        io::SvgSeries evader{{}, "#2ca02c", false}, pursuer{{}, "#d62728", false};
        for (const auto& s : res.samples) {
            evader.pts.push_back(s.evader);
            pursuer.pts.push_back(s.pursuer);
        }
        const io::SvgSeries series[] = {evader, pursuer};
        io::write_svg_plot(cfg.svg, series);
    }

    std::cout << "simulate: " << res.samples.size() << " samples over [" << pc.param0 << ", "
              << (res.capture ? res.capture->param : pc.param1) << "]";
    if (res.capture)
        std::cout << "; capture at param=" << res.capture->param << " ("
                  << res.capture->position.x << ", " << res.capture->position.y << ")";
    std::cout << "; wrote " << out << "\n";
    return 0;
}

int run_compare_params(RunConfig cfg) {
    EllipseShape shape{cfg.a, cfg.b};
    const InvarianceReport rep =
        invariance_check(shape, cfg.n, {cfg.p0x, cfg.p0y}, cfg.anchor_step, cfg.pass_tol,
                         settings_from(cfg), thread_cap());

    const std::string out = output_path(cfg);
    if (cfg.format == "json") {
        json anchors = json::array();
        for (const auto& a : rep.anchors)
            anchors.push_back({{"k", a.k},
                               {"t_standard", a.t_standard},
                               {"t_angvel", a.t_angvel},
                               {"phi_arclen", a.phi_arclen},
                               {"evader", {a.evader.x, a.evader.y}},
                               {"pursuers",
                                {{a.pursuer[0].x, a.pursuer[0].y},
                                 {a.pursuer[1].x, a.pursuer[1].y},
                                 {a.pursuer[2].x, a.pursuer[2].y}}},
                               {"max_dev", a.max_dev}});
        write_json_file(out, json{{"command", "compare-params"},
                                  {"n", cfg.n},
                                  {"a", cfg.a},
                                  {"b", cfg.b},
                                  {"anchors", anchors},
                                  {"max_deviation", rep.max_pursuer_deviation},
                                  {"tolerance", rep.tolerance},
                                  {"pass", rep.pass},
                                  {"capture_reported", rep.capture_reported}});
    } else {
        io::write_compare_csv(out, rep);
    }
    if (!cfg.svg.empty()) {
        const char* colors[3] = {"#d62728", "#2ca02c", "#1f77b4"};
        std::vector<io::SvgSeries> series;
        for (int i = 0; i < 3; ++i) series.push_back({rep.pursuer_paths[i], colors[i], false});
        io::write_svg_plot(cfg.svg, series);
    }

    std::cout << "compare-params: max pursuer deviation " << rep.max_pursuer_deviation
              << " over " << rep.anchors.size() << " anchors -> "
              << (rep.pass ? "PASS" : "FAIL") << " (tol " << rep.tolerance << ")";
    if (rep.capture_reported) std::cout << " [capture reported]";
    std::cout << "; wrote " << out << "\n";
    return 0;
}

int run_dynsys(RunConfig cfg) {
    const double t0 = std::isnan(cfg.t0) ? 0.0 : cfg.t0;
    const double t1 = std::isnan(cfg.t1) ? 10.0 * pi : cfg.t1;
    const bool circular = cfg.a == cfg.b;

    IntegrationResult res =
        circular ? integrate_dds_circle(cfg.n, cfg.a, cfg.rho0, cfg.zeta0, t0, t1,
                                        settings_from(cfg), cfg.capture_eps)
                 : integrate_dds_ellipse(cfg.n, {cfg.a, cfg.b}, cfg.rho0, cfg.zeta0, cfg.phi0,
                                         t0, t1, settings_from(cfg), cfg.capture_eps);

    const std::string out = output_path(cfg);
    if (cfg.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
            const auto y = res.trajectory.state(i);
            json row = {res.trajectory.t[i], y[0], y[1]};
            if (!circular) row.push_back(y[2]);
            rows.push_back(row);
        }
        json cols = circular ? json{"t", "rho", "zeta"} : json{"t", "rho", "zeta", "phi"};
        write_json_file(out, json{{"command", "dynsys"},
                                  {"n", cfg.n},
                                  {"a", cfg.a},
                                  {"b", cfg.b},
                                  {"autonomous", circular},
                                  {"columns", cols},
                                  {"rows", rows},
                                  {"capture", res.event ? json{{"t", res.event->t}} : json(nullptr)}});
    } else {
        io::write_dynsys_csv(out, res.trajectory);
    }
    if (!cfg.svg.empty()) {
        io::SvgSeries phase{{}, "#1f77b4", false};
        for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
            const auto y = res.trajectory.state(i);
            phase.pts.push_back({y[1], y[0]});   // (zeta, rho)
        }
        const io::SvgSeries series[] = {phase};
        io::write_svg_plot(cfg.svg, series);
    }

    const auto yf = res.trajectory.state(res.trajectory.size() - 1);
    std::cout << "dynsys(" << (circular ? "circle" : "ellipse") << "): final t="
              << res.trajectory.t_back() << " rho=" << yf[0] << " zeta=" << yf[1];
    if (res.event) std::cout << "; capture at t=" << res.event->t;
    std::cout << "; wrote " << out << "\n";
    return 0;
}

int run_equilibrium(RunConfig cfg) {
    const EquilibriumReport rep = equilibrium_report(cfg.n, cfg.a);
    const std::string out = output_path(cfg);
    if (cfg.format == "json") {
        write_json_file(
            out, json{{"command", "equilibrium"},
                      {"n", cfg.n},
                      {"a", cfg.a},
                      {"rho_star", rep.rho_star},
                      {"zeta_star", rep.zeta_star},
                      {"class", to_string(rep.stability)},
                      {"eigenvalues",
                       {{{"re", rep.lambda_plus.real()}, {"im", rep.lambda_plus.imag()}},
                        {{"re", rep.lambda_minus.real()}, {"im", rep.lambda_minus.imag()}}}},
                      {"jacobian",
                       {{rep.jacobian.m00, rep.jacobian.m01},
                        {rep.jacobian.m10, rep.jacobian.m11}}}});
    } else {
        io::write_equilibrium_csv(out, rep);
    }
    std::cout << "equilibrium: rho*=" << rep.rho_star << " zeta*=" << rep.zeta_star << " ("
              << to_string(rep.stability) << "); wrote " << out << "\n";
    return 0;
}

int run_zeta_ode(RunConfig cfg) {
    EllipseShape shape{cfg.a, cfg.b};
    const double theta0 = cfg.phi0;
    const double theta1 = std::isnan(cfg.t1) ? theta0 + two_pi : cfg.t1;
    const double slope = std::isnan(cfg.zeta_p0)
                             ? zeta_initial_slope(cfg.rho0, cfg.zeta0, theta0, shape)
                             : cfg.zeta_p0;

    const IntegrationResult res =
        integrate_zeta_ode(cfg.n, shape, cfg.zeta0, slope, theta0, theta1, settings_from(cfg));

    const std::string out = output_path(cfg);
    if (cfg.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
            const auto y = res.trajectory.state(i);
            rows.push_back({res.trajectory.t[i], y[0], y[1]});
        }
        write_json_file(out, json{{"command", "zeta-ode"},
                                  {"n", cfg.n},
                                  {"a", cfg.a},
                                  {"b", cfg.b},
                                  {"theta0", theta0},
                                  {"theta1", theta1},
                                  {"zeta0", cfg.zeta0},
                                  {"zeta_prime0", slope},
                                  {"columns", {"theta", "zeta", "zeta_prime"}},
                                  {"rows", rows}});
    } else {
        io::write_zeta_ode_csv(out, res.trajectory);
    }
    if (!cfg.svg.empty()) {
        io::SvgSeries series_zeta{{}, "#1f77b4", false};
        for (std::size_t i = 0; i < res.trajectory.size(); ++i)
            series_zeta.pts.push_back({res.trajectory.t[i], res.trajectory.state(i)[0]});
        const io::SvgSeries series[] = {series_zeta};
        io::write_svg_plot(cfg.svg, series);
    }

    const auto yf = res.trajectory.state(res.trajectory.size() - 1);
    std::cout << "zeta-ode: zeta'(" << theta0 << ")=" << slope << ", final zeta(" << theta1
              << ")=" << yf[0] << "; wrote " << out << "\n";
    return 0;
}

int run_limit_cycle(RunConfig cfg) {
    const double t0 = std::isnan(cfg.t0) ? 0.0 : cfg.t0;
    const double t1 = std::isnan(cfg.t1) ? 10.0 * pi : cfg.t1;
    const IntegrationResult res =
        integrate_dds_ellipse(cfg.n, {cfg.a, cfg.b}, cfg.rho0, cfg.zeta0, cfg.phi0, t0, t1,
                              settings_from(cfg), cfg.capture_eps);
    const std::vector<SectionCrossing> crossings =
        poincare_crossings(res.trajectory, cfg.section);
    const LimitCycleResult verdict = limit_cycle_detect(crossings, cfg.cycle_tol);

    const std::string out = output_path(cfg);
    if (cfg.format == "json") {
        json cr = json::array();
        for (const auto& c : crossings)
            cr.push_back({{"k", c.k}, {"t", c.t}, {"rho", c.rho}, {"zeta_wrapped", c.zeta_wrapped}});
        write_json_file(out, json{{"command", "limit-cycle"},
                                  {"n", cfg.n},
                                  {"a", cfg.a},
                                  {"b", cfg.b},
                                  {"section", cfg.section},
                                  {"crossings", cr},
                                  {"gaps", verdict.gaps},
                                  {"converged", verdict.converged},
                                  {"last_gap", verdict.last_gap},
                                  {"cycle_point", {verdict.cycle_rho, verdict.cycle_zeta}},
                                  {"gaps_non_increasing", verdict.gaps_non_increasing}});
    } else {
        io::write_limit_cycle_csv(out, crossings, verdict.gaps);
    }
    if (!cfg.svg.empty()) {
        io::SvgSeries pts{{}, "#d62728", true};
        for (const auto& c : crossings) pts.pts.push_back({c.zeta_wrapped, c.rho});
        const io::SvgSeries series[] = {pts};
        io::write_svg_plot(cfg.svg, series);
    }

    std::cout << "limit-cycle: " << crossings.size() << " crossings, last gap "
              << verdict.last_gap << (verdict.converged ? " (converged)" : " (not converged)")
              << "; wrote " << out << "\n";
    return 0;
}

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--n", cfg.n, "pursuer:evader speed ratio");
    cmd->add_option("--a", cfg.a, "semi-axis along x");
    cmd->add_option("--b", cfg.b, "semi-axis along y");
    cmd->add_option("--method", cfg.method, "integrator: adaptive|fixed")
        ->check(CLI::IsMember({"adaptive", "fixed"}));
    cmd->add_option("--step", cfg.step, "fixed-step size");
    cmd->add_option("--tol", cfg.tol, "adaptive relative tolerance");
    cmd->add_option("--output,-o", cfg.output, "output file (default <command>.<ext>)");
    cmd->add_option("--format", cfg.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--svg", cfg.svg, "also write an SVG plot here");
    cmd->add_option("--config", cfg.config_path, "JSON config file (flags override it)");
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        const std::string cfg_path = find_config_arg(argc, argv);
        if (!cfg_path.empty()) apply_json_config(cfg_path, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"pursuit-lab: pursuit/evasion simulations on parametric curves"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "integrate the planar pursuit ODE");
    add_common_options(sim, cfg);
    sim->add_option("--param", cfg.param, "evader parameterization")
        ->check(CLI::IsMember({"standard", "angvel", "arclen", "circle"}));
    sim->add_option("--t0", cfg.t0, "start parameter (default: curve start)");
    sim->add_option("--t1", cfg.t1, "end parameter (default: one orbit)");
    sim->add_option("--p0x", cfg.p0x, "initial pursuer x");
    sim->add_option("--p0y", cfg.p0y, "initial pursuer y");
    sim->add_option("--capture-eps", cfg.capture_eps, "capture radius");

    auto* cmp = app.add_subcommand("compare-params",
                                   "pursuer-trajectory agreement across parameterizations");
    add_common_options(cmp, cfg);
    cmp->add_option("--p0x", cfg.p0x, "initial pursuer x");
    cmp->add_option("--p0y", cfg.p0y, "initial pursuer y");
    cmp->add_option("--anchor-step", cfg.anchor_step, "anchor spacing in t");
    cmp->add_option("--pass-tol", cfg.pass_tol, "max allowed pursuer deviation");

    auto* dyn = app.add_subcommand("dynsys", "reduced (rho, zeta) system; circle when a == b");
    add_common_options(dyn, cfg);
    dyn->add_option("--rho0", cfg.rho0, "initial separation");
    dyn->add_option("--zeta0", cfg.zeta0, "initial angle difference");
    dyn->add_option("--phi0", cfg.phi0, "initial evader phase (elliptical only)");
    dyn->add_option("--t0", cfg.t0, "start time");
    dyn->add_option("--t1", cfg.t1, "end time (default 10*pi)");
    dyn->add_option("--capture-eps", cfg.capture_eps, "capture radius on rho");

    auto* eq = app.add_subcommand("equilibrium", "circular-system equilibrium and stability");
    eq->add_option("--n", cfg.n, "pursuer:evader speed ratio");
    eq->add_option("--a", cfg.a, "circle radius");
    eq->add_option("--output,-o", cfg.output, "output file");
    eq->add_option("--format", cfg.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    eq->add_option("--config", cfg.config_path, "JSON config file (flags override it)");

    auto* zo = app.add_subcommand("zeta-ode", "second-order zeta(Theta) equation");
    add_common_options(zo, cfg);
    zo->add_option("--rho0", cfg.rho0, "rho at Theta0 (sets the initial slope)");
    zo->add_option("--zeta0", cfg.zeta0, "zeta at Theta0");
    zo->add_option("--phi0", cfg.phi0, "Theta0 (default pi/2)");
    zo->add_option("--t1", cfg.t1, "Theta1 (default Theta0 + 2*pi)");
    zo->add_option("--zeta-p0", cfg.zeta_p0, "explicit initial slope (overrides rho0)");

    auto* lc = app.add_subcommand("limit-cycle", "Poincare-section convergence verdict");
    add_common_options(lc, cfg);
    lc->add_option("--rho0", cfg.rho0, "initial separation");
    lc->add_option("--zeta0", cfg.zeta0, "initial angle difference");
    lc->add_option("--phi0", cfg.phi0, "initial evader phase");
    lc->add_option("--t0", cfg.t0, "start time");
    lc->add_option("--t1", cfg.t1, "end time (default 10*pi)");
    lc->add_option("--section", cfg.section, "section phase (default pi/2)");
    lc->add_option("--cycle-tol", cfg.cycle_tol, "convergence gap tolerance");
    lc->add_option("--capture-eps", cfg.capture_eps, "capture radius on rho");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(sim)) {
            cfg.command = "simulate";
            return run_simulate(cfg);
        }
        if (app.got_subcommand(cmp)) {
            cfg.command = "compare-params";
            return run_compare_params(cfg);
        }
        if (app.got_subcommand(dyn)) {
            cfg.command = "dynsys";
            return run_dynsys(cfg);
        }
        if (app.got_subcommand(eq)) {
            cfg.command = "equilibrium";
            return run_equilibrium(cfg);
        }
        if (app.got_subcommand(zo)) {
            cfg.command = "zeta-ode";
            return run_zeta_ode(cfg);
        }
        if (app.got_subcommand(lc)) {
            cfg.command = "limit-cycle";
            return run_limit_cycle(cfg);
        }
    } catch (const IntegrationError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const SingularityError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
