#include "eplab/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "eplab/cli/output.hpp"
#include "eplab/cli/range_spec.hpp"
#include "eplab/cli/svg_plot.hpp"
#include "eplab/ep/ep_finder.hpp"
#include "eplab/errors.hpp"
#include "eplab/format.hpp"
#include "eplab/model/mean_field.hpp"
#include "eplab/model/params.hpp"
#include "eplab/ode/integrator.hpp"
#include "eplab/oracle/lindblad.hpp"
#include "eplab/spectrum/spectrum.hpp"

namespace eplab::cli {

namespace {

using spectrum::PumpMode;

struct Globals {
    std::string config;
    std::string mode = "coupled";
    std::string out;
    std::string svg;
    model::ModelParams flags;
    std::vector<std::pair<CLI::Option*, double model::ModelParams::*>> rate_options;
};

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::vector<std::string> args;
    model::ModelParams params;
    PumpMode mode = PumpMode::coupled;
    std::string out_path;
    std::string svg_path;
};

void add_rate(CLI::App& app, Globals& g, const char* name, double model::ModelParams::*field,
              const char* help)
{
    auto* opt = app.add_option(name, g.flags.*field, help);
    g.rate_options.emplace_back(opt, field);
}

// Defaults, then config file, then explicit flags.
model::ModelParams resolve_params(Globals& g)
{
    auto p = model::paper_defaults();
    if (!g.config.empty())
        p = model::load_config(g.config, p);

    for (const auto& [opt, field] : g.rate_options)
        if (opt->count() > 0)
            p.*field = g.flags.*field;
    p.validate();
    return p;
}

// Plain number or a fraction a/b.
double parse_value(const std::string& text, std::string_view what)
{
    const auto slash = text.find('/');
    if (slash == std::string::npos)
        return parse_number(text, what);
    const double num = parse_number(std::string_view(text).substr(0, slash), what);
    const double den = parse_number(std::string_view(text).substr(slash + 1), what);
    if (den == 0.0)
        throw UsageError(std::string(what) + ": zero denominator in '" + text + "'");
    return num / den;
}

RunManifest base_manifest(const Context& ctx, std::string subcommand)
{
    RunManifest m;
    m.subcommand = std::move(subcommand);
    m.params = ctx.params;
    m.pump_mode = spectrum::to_string(ctx.mode);
    m.arguments = ctx.args;
    m.timestamp = utc_timestamp();
    return m;
}

// Writes the main text (to --out or stdout), the optional SVG, and a manifest
// beside every file written.
void emit(const Context& ctx, RunManifest manifest, const std::string& text,
          const std::vector<Panel>& panels = {})
{
    if (!ctx.out_path.empty())
        manifest.outputs.push_back(ctx.out_path);
    const bool want_svg = !ctx.svg_path.empty() && !panels.empty();
    if (want_svg)
        manifest.outputs.push_back(ctx.svg_path);

    const std::string mtext = manifest.to_json().dump(2) + "\n";
    if (!ctx.out_path.empty()) {
        write_atomic(ctx.out_path, text);
        write_atomic(manifest_path(ctx.out_path), mtext);
    } else {
        ctx.out << text;
        ctx.out.flush();
    }
    if (want_svg) {
        write_atomic(ctx.svg_path, render_svg(panels));
        write_atomic(manifest_path(ctx.svg_path), mtext);
    } else if (!ctx.svg_path.empty()) {
        ctx.err << "note: --svg is ignored by this subcommand\n";
    }
}

// ---------------------------------------------------------------- spectrum

int cmd_spectrum(Context& ctx, const std::string& d0_text)
{
    const auto range = parse_range(d0_text);
    const auto grid = range.values();
    const auto sets = spectrum::sweep(ctx.params, grid, ctx.mode);
    const auto rows = spectrum::track_branches(sets);

    CsvTable csv("d0,re1,im1,re2,im2,re3,im3,ov12,ov13,ov23,disc");
    std::vector<Panel> panels(2);
    panels[0] = {"Decay rates Re(lambda)", "D0", "Re lambda", {}};
    panels[1] = {"Frequencies Im(lambda)", "D0", "Im lambda", {}};
    for (int k = 0; k < 3; ++k) {
        panels[0].series.push_back({"lambda" + std::to_string(k + 1), {}, {}});
        panels[1].series.push_back({"lambda" + std::to_string(k + 1), {}, {}});
    }
    for (const auto& r : rows) {
        csv.add_row({cell(r.d0), cell(r.lambdas[0].real()), cell(r.lambdas[0].imag()),
                     cell(r.lambdas[1].real()), cell(r.lambdas[1].imag()),
                     cell(r.lambdas[2].real()), cell(r.lambdas[2].imag()), cell(r.overlaps(0, 1)),
                     cell(r.overlaps(0, 2)), cell(r.overlaps(1, 2)), cell(r.discriminant)});
        for (int k = 0; k < 3; ++k) {
            panels[0].series[k].x.push_back(r.d0);
            panels[0].series[k].y.push_back(r.lambdas[k].real());
            panels[1].series[k].x.push_back(r.d0);
            panels[1].series[k].y.push_back(r.lambdas[k].imag());
        }
    }

    auto m = base_manifest(ctx, "spectrum");
    m.grids.emplace_back("d0", range.str());
    emit(ctx, std::move(m), csv.text(), panels);
    return kExitOk;
}

// ---------------------------------------------------------------------- ep

ep::SearchOptions search_options(const std::string& text)
{
    ep::SearchOptions s;
    if (text.empty())
        return s;
    const auto r = parse_range(text);
    s.lo = r.lo;
    s.hi = r.hi;
    s.scan_points = r.count;
    return s;
}

std::string search_str(const ep::SearchOptions& s)
{
    return format_double(s.lo) + ":" + format_double(s.hi) + ":" + std::to_string(s.scan_points);
}

int cmd_ep(Context& ctx, const std::string& locus_text, const std::string& search_text)
{
    const auto search = search_options(search_text);

    if (locus_text.empty()) {
        const auto r = ep::locate_ep(ctx.params, search, ctx.mode);
        if (!r.confirmed())
            throw NoExceptionalPointError(
                "eigenvalues coalesce near d0 = " + format_double(r.d0_ep) +
                    " but eigenvector overlap " + format_double(r.overlap_ep) + " is below " +
                    format_double(search.overlap_gate) +
                    " (diabolic, not exceptional); no exceptional point in [" +
                    format_double(search.lo) + ", " + format_double(search.hi) + "]",
                search.lo, search.hi);
        std::ostringstream os;
        os << "gamma_cor=" << format_double(ctx.params.gamma_cor) << '\n'
           << "d0_ep=" << format_double(r.d0_ep) << '\n'
           << "gamma_p_ep=" << format_double(r.gamma_p_ep) << '\n'
           << "overlap_ep=" << format_double(r.overlap_ep) << '\n'
           << "bracket_width=" << format_double(r.bracket_width) << '\n'
           << "lambda_ep=" << format_double(r.lambda_ep.real()) << (r.lambda_ep.imag() < 0 ? "" : "+")
           << format_double(r.lambda_ep.imag()) << "i\n"
           << "eigenvalue_gap=" << format_double(r.eigenvalue_gap) << '\n'
           << "mode=" << spectrum::to_string(r.mode) << '\n';
        if (r.brackets.size() > 1)
            ctx.err << "note: " << r.brackets.size()
                    << " discriminant sign changes found; reported the largest-d0 pair collapse\n";
        auto m = base_manifest(ctx, "ep");
        m.grids.emplace_back("search", search_str(search));
        emit(ctx, std::move(m), os.str());
        return kExitOk;
    }

    const auto range = parse_range(locus_text);
    const auto grid = range.values();
    const auto rows = ep::ep_locus(ctx.params, grid, search, ctx.mode);

    CsvTable csv("gamma_cor,d0_ep,gamma_p_ep,overlap_ep,bracket_width");
    Panel panel{"Exceptional point locus", "gamma_cor", "D0 at EP", {{"d0_ep", {}, {}}}};
    std::size_t missing = 0;
    const double nan = std::nan("");
    for (const auto& r : rows) {
        if (r.found) {
            csv.add_row({cell(r.gamma_cor), cell(r.result.d0_ep), cell(r.result.gamma_p_ep),
                         cell(r.result.overlap_ep), cell(r.result.bracket_width)});
        } else {
            ++missing;
            ctx.err << "gamma_cor=" << format_double(r.gamma_cor) << ": " << r.failure << '\n';
            csv.add_row({cell(r.gamma_cor), cell(nan), cell(nan), cell(nan), cell(nan)});
        }
        panel.series[0].x.push_back(r.gamma_cor);
        panel.series[0].y.push_back(r.found ? r.result.d0_ep : nan);
    }

    auto m = base_manifest(ctx, "ep");
    m.grids.emplace_back("gamma_cor", range.str());
    m.grids.emplace_back("search", search_str(search));
    emit(ctx, std::move(m), csv.text(), {panel});
    if (missing > 0) {
        ctx.err << missing << " of " << rows.size() << " gamma_cor values have no exceptional point in ["
                << format_double(search.lo) << ", " << format_double(search.hi) << "]\n";
        return kExitNoEp;
    }
    return kExitOk;
}

// --------------------------------------------------------------- splitting

int cmd_splitting(Context& ctx, const std::string& d0_text)
{
    const auto range = parse_range(d0_text);
    const auto grid = range.values();
    const auto rows = ep::splitting_curve(ctx.params, grid, ctx.mode);

    CsvTable csv("d0,dim,dre");
    Panel panel{"Splitting of branches 2 and 3", "D0", "splitting", {{"dim", {}, {}}, {"dre", {}, {}}}};
    for (const auto& r : rows) {
        csv.add_row({cell(r.d0), cell(r.dim), cell(r.dre)});
        panel.series[0].x.push_back(r.d0);
        panel.series[0].y.push_back(r.dim);
        panel.series[1].x.push_back(r.d0);
        panel.series[1].y.push_back(r.dre);
    }
    auto m = base_manifest(ctx, "splitting");
    m.grids.emplace_back("d0", range.str());
    emit(ctx, std::move(m), csv.text(), {panel});
    return kExitOk;
}

// --------------------------------------------------------------------- dst

int cmd_dst(Context& ctx, const std::string& ratio_text)
{
    const auto range = parse_range(ratio_text);
    const auto grid = range.values();
    const auto rows = ode::dst_curve(ctx.params, grid);

    CsvTable csv("pump_ratio,D_st,D_0,converged");
    Panel panel{"Stationary inversion", "gamma_P / gamma_D", "D", {{"D_st", {}, {}}, {"D_0", {}, {}}}};
    for (const auto& r : rows) {
        csv.add_row({cell(r.pump_ratio), cell(r.d_st), cell(r.d0), cell(r.converged)});
        if (!r.converged)
            ctx.err << "warning: pump_ratio=" << format_double(r.pump_ratio)
                    << " did not converge (residual " << format_double(r.residual) << ")\n";
        panel.series[0].x.push_back(r.pump_ratio);
        panel.series[0].y.push_back(r.d_st);
        panel.series[1].x.push_back(r.pump_ratio);
        panel.series[1].y.push_back(r.d0);
    }
    auto m = base_manifest(ctx, "dst");
    m.grids.emplace_back("ratio", range.str());
    emit(ctx, std::move(m), csv.text(), {panel});
    return kExitOk;
}

// ------------------------------------------------------------------ oracle

int cmd_oracle(Context& ctx, const std::string& name, CLI::Option* rate_opt, double rate, int n_max)
{
    const auto channel = oracle::parse_channel(name);
    model::ModelParams p = ctx.params;
    if (rate_opt->count() > 0) {
        switch (channel) {
        case oracle::Channel::cavity: p.gamma_a = rate; break;
        case oracle::Channel::dephasing: p.gamma_ph = rate; break;
        case oracle::Channel::decay: p.gamma_d = rate; break;
        case oracle::Channel::pump: p.gamma_p = rate; break;
        case oracle::Channel::correlation: p.gamma_cor = rate; break;
        }
    }
    const auto rep = oracle::verify_dissipator(p, channel, n_max);

    CsvTable csv("dissipator,observable,fitted_rate,analytic_rate,rel_err");
    for (const auto& r : rep.rows)
        csv.add_row({r.dissipator, r.observable, cell(r.fitted_rate), cell(r.analytic_rate),
                      cell(r.rel_err)});

    auto m = base_manifest(ctx, "oracle");
    m.params = p;
    m.grids.emplace_back("n_max", std::to_string(n_max));
    emit(ctx, std::move(m), csv.text());
    ctx.err << rep.summary();
    return rep.passed() ? kExitOk : kExitOracleMismatch;
}

// ------------------------------------------------------------------- audit

double rel_gap(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

void audit_triple(std::ostream& os, const char* label, const model::ModelParams& q, double d0,
                  const std::function<model::StationaryTriple()>& make)
{
    os << "  " << label << ":\n";
    try {
        const auto t = make();
        const auto res = model::stationarity_residuals(q, d0, t);
        const double norm = std::sqrt(res[0] * res[0] + res[1] * res[1] + res[2] * res[2]);
        const double gs = model::gamma_sigma(q);
        os << "    n_st=" << format_double(t.n_st) << " phi_st=" << format_double(t.phi_st)
           << " s_st=" << format_double(t.s_st) << '\n'
           << "    residual dn/dt=" << format_double(res[0]) << " dphi/dt=" << format_double(res[1])
           << " ds/dt=" << format_double(res[2]) << " norm=" << format_double(norm) << '\n'
           << "    relation phi_st*sqrt(N)*omega_r = gamma_a*n_st: rel_err="
           << format_double(rel_gap(t.phi_st * q.sqrt_n() * q.omega_r, q.gamma_a * t.n_st)) << '\n'
           << "    relation s_st*(2 gamma_sigma+gamma_cor) = 2 gamma_a D0 n_st: rel_err="
           << format_double(rel_gap(t.s_st * (2.0 * gs + q.gamma_cor), 2.0 * q.gamma_a * d0 * t.n_st))
           << '\n';
    } catch (const Error& e) {
        os << "    unavailable: " << e.what() << '\n';
    }
}

int cmd_audit(Context& ctx, const std::vector<std::string>& d0_texts)
{
    std::vector<double> d0s;
    for (const auto& t : d0_texts) d0s.push_back(parse_value(t, "--d0"));

    std::ostringstream os;
    os << "stationary-value audit, gamma_cor=" << format_double(ctx.params.gamma_cor)
       << ", pump mode " << spectrum::to_string(ctx.mode) << '\n';
    for (double d0 : d0s) {
        os << "d0=" << format_double(d0) << '\n';
        model::ModelParams q = ctx.params;
        try {
            if (ctx.mode == PumpMode::coupled)
                q = model::with_d0(q, d0);
        } catch (const Error& e) {
            os << "  unavailable: " << e.what() << '\n';
            continue;
        }
        os << "  gamma_p=" << format_double(q.gamma_p)
           << " gamma_sigma=" << format_double(model::gamma_sigma(q)) << '\n';
        audit_triple(os, "printed closed form", q, d0, [&] { return model::stationary_printed(q, d0); });
        audit_triple(os, "exact linear solve", q, d0, [&] { return model::stationary_exact(q, d0); });
        try {
            const auto a = model::stationary_printed(q, d0);
            const auto b = model::stationary_exact(q, d0);
            os << "  printed/exact: n " << format_double(b.n_st == 0.0 ? std::nan("") : a.n_st / b.n_st)
               << " phi " << format_double(b.phi_st == 0.0 ? std::nan("") : a.phi_st / b.phi_st)
               << " s " << format_double(b.s_st == 0.0 ? std::nan("") : a.s_st / b.s_st) << '\n';
        } catch (const Error&) {
        }
    }

    auto m = base_manifest(ctx, "audit");
    std::string list;
    for (const auto& t : d0_texts) list += (list.empty() ? "" : ",") + t;
    m.grids.emplace_back("d0", list);
    emit(ctx, std::move(m), os.str());
    return kExitOk;
}

// -------------------------------------------------------------- trajectory

int cmd_trajectory(Context& ctx, CLI::Option* t_end_opt, double t_end, std::size_t samples,
                   const std::string& d0_text, const std::vector<double>& init)
{
    model::ModelParams p = ctx.params;
    if (!d0_text.empty())
        p = model::with_d0(p, parse_value(d0_text, "--d0"));
    if (t_end_opt->count() == 0)
        t_end = ode::default_horizon(p);

    model::MeanFieldState x0 = ode::default_initial_state(p);
    if (!init.empty()) {
        if (init.size() != 4)
            throw UsageError("--init takes four values n,D,phi,s");
        x0 = {init[0], init[1], init[2], init[3]};
    }
    ode::StepControls ctrl;
    ctrl.samples = samples;
    const auto traj = ode::integrate(p, x0, t_end, ctrl);

    CsvTable csv("t,n,D,phi,s");
    Panel panel{"Mean-field trajectory", "t", "value", {{"n", {}, {}}, {"D", {}, {}}}};
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& x = traj.states[i];
        csv.add_row({cell(traj.times[i]), cell(x.n), cell(x.d), cell(x.phi), cell(x.s)});
        panel.series[0].x.push_back(traj.times[i]);
        panel.series[0].y.push_back(x.n);
        panel.series[1].x.push_back(traj.times[i]);
        panel.series[1].y.push_back(x.d);
    }
    auto m = base_manifest(ctx, "trajectory");
    m.params = p;
    m.grids.emplace_back("t", "0:" + format_double(t_end) + ":" + std::to_string(samples));
    emit(ctx, std::move(m), csv.text(), {panel});
    return kExitOk;
}

int exit_code_for(const Error& e)
{
    if (dynamic_cast<const NoExceptionalPointError*>(&e))
        return kExitNoEp;
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const DegeneratePumpError*>(&e))
        return kExitUsage;
    return kExitNumeric;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exceptional points of a pumped molecular ensemble in a cavity", "eplab"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kToolVersion));

    Globals g;
    app.add_option("--config", g.config, "key = value parameter file")->check(CLI::ExistingFile);
    add_rate(app, g, "--gamma-a", &model::ModelParams::gamma_a, "cavity decay rate");
    add_rate(app, g, "--gamma-ph", &model::ModelParams::gamma_ph, "dephasing rate");
    add_rate(app, g, "--gamma-d", &model::ModelParams::gamma_d, "molecular decay rate");
    add_rate(app, g, "--gamma-p", &model::ModelParams::gamma_p, "pump rate");
    add_rate(app, g, "--gamma-cor", &model::ModelParams::gamma_cor, "polarization-correlation decay rate");
    add_rate(app, g, "--omega-r", &model::ModelParams::omega_r, "single-molecule coupling");
    add_rate(app, g, "--n-mol", &model::ModelParams::n_mol, "number of molecules");
    app.add_option("--mode", g.mode, "pump handling in D0 sweeps")
        ->check(CLI::IsMember({"coupled", "frozen"}))
        ->capture_default_str();
    app.add_option("--out", g.out, "output file (default: standard output)");
    app.add_option("--svg", g.svg, "SVG line plot of the output");

    auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalue branches over a D0 grid");
    std::string spectrum_d0 = "-1:0:2001";
    spectrum_cmd->add_option("--d0", spectrum_d0, "D0 range lo:hi:count")->capture_default_str();

    auto* ep_cmd = app.add_subcommand("ep", "locate the exceptional point");
    std::string locus, search;
    ep_cmd->add_option("--locus", locus, "gamma_cor range lo:hi:count; writes the EP locus");
    ep_cmd->add_option("--search", search, "D0 scan lo:hi:points (default -0.999999:-1e-06:2001)");

    auto* split_cmd = app.add_subcommand("splitting", "splitting of branches 2 and 3 over D0");
    std::string split_d0 = "-1:0:2001";
    split_cmd->add_option("--d0", split_d0, "D0 range lo:hi:count")->capture_default_str();

    auto* dst_cmd = app.add_subcommand("dst", "stationary inversion against pump ratio");
    std::string ratio = "0:2:41";
    dst_cmd->add_option("--ratio", ratio, "gamma_P/gamma_D range lo:hi:count")->capture_default_str();

    auto* oracle_cmd = app.add_subcommand("oracle", "check one dissipator against its rate");
    std::string dissipator;
    double oracle_rate = 0.0;
    int n_max = 3;
    oracle_cmd->add_option("--dissipator", dissipator, "cavity, ph, decay, pump or cor")->required();
    auto* rate_opt = oracle_cmd->add_option("--rate", oracle_rate, "rate of the dissipator");
    oracle_cmd->add_option("--n-max", n_max, "Fock cutoff")->capture_default_str();

    auto* audit_cmd = app.add_subcommand("audit", "closed-form vs exact stationary values");
    std::vector<std::string> audit_d0{"-1/3"};
    audit_cmd->add_option("--d0", audit_d0, "D0 values, comma separated; a/b allowed")
        ->delimiter(',')
        ->capture_default_str();

    auto* traj_cmd = app.add_subcommand("trajectory", "integrate the mean-field equations");
    double t_end = 0.0;
    std::size_t samples = 101;
    std::string traj_d0;
    std::vector<double> init;
    auto* t_end_opt = traj_cmd->add_option("--t-end", t_end, "final time (default: relaxation horizon)");
    traj_cmd->add_option("--samples", samples, "output samples on [0, t-end]")->capture_default_str();
    traj_cmd->add_option("--d0", traj_d0, "set gamma_P from this field-free inversion");
    traj_cmd->add_option("--init", init, "initial n,D,phi,s")->delimiter(',')->expected(4);

    auto* replay_cmd = app.add_subcommand("replay", "rerun the command recorded in a manifest");
    std::string manifest_file;
    replay_cmd->add_option("manifest", manifest_file, "manifest JSON")->required()->check(CLI::ExistingFile);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (replay_cmd->parsed()) {
        try {
            std::ifstream in(manifest_file);
            const auto j = nlohmann::json::parse(in);
            const auto m = RunManifest::from_json(j);
            return run_cli(m.arguments, out, err);
        } catch (const nlohmann::json::exception& e) {
            err << "error: cannot read manifest: " << e.what() << '\n';
            return kExitUsage;
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return exit_code_for(e);
        }
    }

    Context ctx{out, err, args, {}, PumpMode::coupled, g.out, g.svg};
    try {
        ctx.params = resolve_params(g);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    ctx.mode = g.mode == "frozen" ? PumpMode::frozen : PumpMode::coupled;

    try {
        if (spectrum_cmd->parsed())
            return cmd_spectrum(ctx, spectrum_d0);
        if (ep_cmd->parsed())
            return cmd_ep(ctx, locus, search);
        if (split_cmd->parsed())
            return cmd_splitting(ctx, split_d0);
        if (dst_cmd->parsed())
            return cmd_dst(ctx, ratio);
        if (oracle_cmd->parsed())
            return cmd_oracle(ctx, dissipator, rate_opt, oracle_rate, n_max);
        if (audit_cmd->parsed())
            return cmd_audit(ctx, audit_d0);
        if (traj_cmd->parsed())
            return cmd_trajectory(ctx, t_end_opt, t_end, samples, traj_d0, init);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace eplab::cli
