#include "subscat/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <utility>

#include <json.hpp>

#include "subscat/errors.hpp"
#include "subscat/larmor.hpp"
#include "subscat/parallel.hpp"
#include "subscat/timing.hpp"
#include "subscat/wavepacket.hpp"

namespace subscat {

std::string format_number(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

namespace fs = std::filesystem;

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(const std::vector<double>& row) { rows_.push_back(row); }

    void write(const fs::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + path.string());
        for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
        out << '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
            out << '\n';
        }
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

// quantity,value records.
class Summary {
public:
    void add(std::string key, double value) { items_.emplace_back(std::move(key), value); }
    void write(const fs::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + path.string());
        out << "quantity,value\n";
        for (const auto& [k, v] : items_) out << k << ',' << format_number(v) << '\n';
    }

private:
    std::vector<std::pair<std::string, double>> items_;
};

struct Context {
    const ExperimentConfig& config;
    UnitSystem units;
    Barrier barrier;
    BasisMethod method;
    fs::path out;
    int threads;
    RunOutputs outputs;
    nlohmann::json resolved = nlohmann::json::object();

    void emit(const Table& t, const std::string& name) {
        t.write(out / name);
        outputs.files.push_back(out / name);
    }
    void emit(const Summary& s, const std::string& name) {
        s.write(out / name);
        outputs.files.push_back(out / name);
    }
};

// Packet times bracketing the whole passage when the config gives none.
std::vector<double> time_values(Context& ctx, const SpectralProfile& prof, std::size_t count) {
    if (ctx.config.time_grid) {
        std::vector<double> t = ctx.config.time_grid->values();
        for (double& v : t) v = ctx.units.from_ps(v);
        return t;
    }
    const double v_min = ctx.units.velocity(prof.k.front());
    const double v_max = ctx.units.velocity(prof.k.back());
    const double x0 = ctx.barrier.a() - 12.0 * prof.l0;
    const double start = x0 < 0.0 ? x0 / v_min : x0 / v_max;
    const double stop = (ctx.barrier.b() + 12.0 * prof.l0) / v_min;
    ctx.resolved["time_grid"] = {{"start", ctx.units.to_ps(start)}, {"stop", ctx.units.to_ps(stop)}, {"count", count}};
    return Grid{start, stop, count}.values();
}

struct TraceRow {
    double t, x_tr, x_free, norm_tr, norm_ref, norm_full, cross;
};

std::vector<TraceRow> packet_trace(const ScatteringSet& set, const std::vector<double>& times, int threads) {
    const Field fields[] = {Field::Full, Field::Transmitted, Field::Reflected, Field::Free};
    std::vector<TraceRow> rows;
    for (double t : times) {
        Snapshot s = snapshot(set, fields, t, false, threads);
        double full = 0.0, tr = 0.0, ref = 0.0, free = 0.0, xtr = 0.0, xfree = 0.0, cross = 0.0;
        for (std::size_t i = 0; i < s.grid.nodes.size(); ++i) {
            const auto& q = s.grid.nodes[i];
            const double rt = std::norm(s.fields[1].value[i]);
            const double rf = std::norm(s.fields[3].value[i]);
            full += q.w * std::norm(s.fields[0].value[i]);
            tr += q.w * rt;
            ref += q.w * std::norm(s.fields[2].value[i]);
            free += q.w * rf;
            xtr += q.w * q.x * rt;
            xfree += q.w * q.x * rf;
            cross += q.w * std::real(std::conj(s.fields[1].value[i]) * s.fields[2].value[i]);
        }
        rows.push_back({t, xtr / tr, xfree / free, tr, ref, full, cross});
    }
    return rows;
}

void write_trace(Context& ctx, const std::vector<TraceRow>& rows) {
    Table t({"t_ps", "x_tr_nm", "x_free_nm", "norm_tr", "norm_ref"});
    for (const auto& r : rows)
        t.add({ctx.units.to_ps(r.t), ctx.units.to_nm(r.x_tr), ctx.units.to_nm(r.x_free), r.norm_tr, r.norm_ref});
    ctx.emit(t, "trace.csv");
}

void run_amplitudes(Context& ctx) {
    const auto& c = ctx.config;
    const UnitSystem& u = ctx.units;
    std::vector<double> energies;
    if (c.energy_grid) {
        energies = c.energy_grid->values();
    } else {
        const double e0 = u.to_ev(u.energy(c.wavenumber()));
        const double top = std::max(e0, u.to_ev(ctx.barrier.scale()));
        const Grid g{0.1 * e0, 2.0 * top, 96};
        energies = g.values();
        ctx.resolved["energy_grid"] = {{"start", g.start}, {"stop", g.stop}, {"count", g.count}};
    }
    const std::size_t n = energies.size();
    std::vector<std::vector<double>> rows(n);
    parallel_for(n, ctx.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double k = u.wavenumber(u.from_ev(energies[i]));
            StationaryTriple tri = solve_stationary(ctx.barrier, k, u, ctx.method);
            const ScatteringAmplitudes& a = tri.amplitudes();
            const LarmorClocks lc = larmor_clocks(ctx.barrier, k, u, ctx.method);
            const double dgr = group_length(ctx.barrier, k, u, 0.0, ctx.method);
            rows[i] = {energies[i], k / u.length_unit, a.T, a.R, a.J, a.lambda,
                       a.a_out.real(), a.a_out.imag(), a.b_out.real(), a.b_out.imag(),
                       a.A_tr_in.real(), a.A_tr_in.imag(), a.A_ref_in.real(), a.A_ref_in.imag(),
                       u.to_nm(dgr), u.to_ps(lc.tau_dwell), u.to_ps(lc.tau0), u.to_ps(lc.tau_end),
                       u.to_ps(lc.tau_int)};
        }
    });
    Table t({"E_ev", "k_per_nm", "T", "R", "J", "lambda", "re_a_out", "im_a_out", "re_b_out", "im_b_out",
             "re_A_tr_in", "im_A_tr_in", "re_A_ref_in", "im_A_ref_in", "d_gr_nm", "tau_dwell_ps", "tau0_ps",
             "tau_end_ps", "tau_int_ps"});
    for (const auto& r : rows) t.add(r);
    ctx.emit(t, "amplitudes.csv");
}

void run_times(Context& ctx) {
    const UnitSystem& u = ctx.units;
    const SpectralProfile prof = ctx.config.profile();
    auto set = make_scattering_set(prof, ctx.barrier, u, ctx.method, ctx.threads);
    const std::vector<double> times = time_values(ctx, prof, 201);

    AsymptoticGroupTime as = asymptotic_group_time(*set);
    ExactGroupTime ex = exact_group_time(PacketField{set, Field::Transmitted}, times, ctx.threads);
    DwellResult dw = dwell_time(ctx.barrier, prof.k0, u, ctx.method);
    const auto trace = packet_trace(*set, times, ctx.threads);

    Summary s;
    s.add("T_packet", set->transmission());
    s.add("R_packet", set->reflection());
    s.add("k0_per_nm", prof.k0 / u.length_unit);
    s.add("mean_k_tr_per_nm", as.mean_k_tr / u.length_unit);
    s.add("d_gr_nm", u.to_nm(as.d_gr));
    s.add("x_start_tr_nm", u.to_nm(as.x_start_tr));
    s.add("tau_free_ps", u.to_ps(as.tau_free));
    s.add("tau_as_ps", u.to_ps(as.tau_as));
    s.add("tau_exact_ps", u.to_ps(ex.tau_exact));
    s.add("t1_ps", u.to_ps(ex.t1));
    s.add("t2_ps", u.to_ps(ex.t2));
    s.add("crossings_left", static_cast<double>(ex.crossings_left));
    s.add("crossings_right", static_cast<double>(ex.crossings_right));
    s.add("tau_dwell_k0_ps", u.to_ps(dw.tau_dwell));
    s.add("final_lead_nm", u.to_nm(trace.back().x_tr - trace.back().x_free));
    ctx.emit(s, "times_summary.csv");
    write_trace(ctx, trace);
}

void run_packet_trace(Context& ctx) {
    const SpectralProfile prof = ctx.config.profile();
    auto set = make_scattering_set(prof, ctx.barrier, ctx.units, ctx.method, ctx.threads);
    const std::vector<double> times = time_values(ctx, prof, 201);
    const auto trace = packet_trace(*set, times, ctx.threads);
    write_trace(ctx, trace);

    const double R = set->reflection();
    const double T = 1.0 - R;
    double dev = 0.0, drift = 0.0, full = 0.0, cross = 0.0;
    for (const auto& r : trace) {
        dev = std::max(dev, std::abs(r.norm_tr - T));
        drift = std::max(drift, std::abs(r.norm_ref - R));
        full = std::max(full, std::abs(r.norm_full - 1.0));
        cross = std::max(cross, std::abs(r.cross));
    }
    Summary s;
    s.add("T_spectral", T);
    s.add("R_spectral", R);
    s.add("T_packet", set->transmission());
    s.add("max_deviation", dev);
    s.add("max_deviation_over_T", dev / T);
    s.add("max_R_drift", drift);
    s.add("max_full_norm_error", full);
    s.add("max_abs_cross", cross);
    ctx.emit(s, "packet_trace_summary.csv");
}

void run_hartman(Context& ctx) {
    const auto& c = ctx.config;
    const UnitSystem& u = ctx.units;
    if (c.barrier_kind != "rectangular") throw ConfigError("hartman-sweep needs a rectangular barrier");
    const double k = c.wavenumber();
    const double height = ctx.barrier.height();
    if (!(u.energy(k) < height)) throw ConfigError("hartman-sweep needs E0 below the barrier height");
    std::vector<double> widths;
    if (!c.widths.empty()) {
        for (double w : c.widths) widths.push_back(u.from_nm(w));
    } else {
        const double kappa = std::sqrt((height - u.energy(k)) / u.kinetic());
        widths = Grid{3.0 / kappa, 12.0 / kappa, 10}.values();
        std::vector<double> shown;
        for (double w : widths) shown.push_back(u.to_nm(w));
        ctx.resolved["sweep"] = {{"widths", shown}};
    }
    HartmanSweep sw = hartman_sweep(height, k, widths, u, ctx.barrier.a());
    Table t({"d_nm", "T", "d_gr_nm", "tau_dwell_ps", "tau0_ps", "tau_end_ps", "tau_int_ps"});
    for (const auto& r : sw.rows)
        t.add({u.to_nm(r.d), r.T, u.to_nm(r.d_gr), u.to_ps(r.tau_dwell), u.to_ps(r.tau0), u.to_ps(r.tau_end),
               u.to_ps(r.tau_int)});
    ctx.emit(t, "sweep.csv");
    HartmanChecks hc = check_hartman(sw);
    Summary s;
    s.add("kappa_b_per_nm", sw.kappa_b / u.length_unit);
    s.add("tau_end_limit_ps", u.to_ps(sw.tau_end_limit));
    s.add("tau_end_monotone", hc.tau_end_monotone ? 1.0 : 0.0);
    s.add("final_gap", hc.final_gap);
    s.add("dwell_slope_per_nm", hc.dwell_slope / u.length_unit);
    s.add("dwell_slope_error", hc.dwell_slope_error);
    s.add("tau_int_negative", hc.tau_int_negative ? 1.0 : 0.0);
    s.add("int_to_dwell_ratio", hc.int_to_dwell_ratio);
    ctx.emit(s, "sweep_summary.csv");
}

void run_larmor(Context& ctx) {
    const auto& c = ctx.config;
    const UnitSystem& u = ctx.units;
    const SpectralProfile prof = c.profile();
    auto set = make_scattering_set(prof, ctx.barrier, u, ctx.method, ctx.threads);
    const std::vector<double> times = time_values(ctx, prof, 33);
    const double omega = c.omega ? u.from_ev(*c.omega) / UnitSystem::hbar
                                 : default_larmor_frequency(ctx.barrier, prof.k0, u);
    if (!c.omega) ctx.resolved["omega"] = u.to_ev(omega * UnitSystem::hbar);

    LarmorTimes lt = larmor_times(*set, ctx.threads);
    std::optional<DirectLarmor> direct;
    if (c.direct_larmor) direct = direct_larmor_time(*set, ctx.threads);
    LarmorRichardson lr;
    try {
        lr = spinor_richardson(prof, ctx.barrier, u, omega, times, ctx.method, ctx.threads);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("larmor.omega: ") + e.what());
    }

    Table t({"t_ps", "Sx", "Sy", "Sz", "theta", "phi"});
    const SpinSeries& sp = lr.coarse;
    for (std::size_t i = 0; i < sp.times.size(); ++i)
        t.add({u.to_ps(sp.times[i]), sp.Sx[i], sp.Sy[i], sp.Sz[i], sp.theta[i], sp.phi[i]});
    ctx.emit(t, "larmor.csv");

    const double target = lt.tau_L + lt.tau_int;
    Summary s;
    s.add("tau0_ps", u.to_ps(lt.tau0));
    s.add("tau_L_ps", u.to_ps(lt.tau_L));
    s.add("tau_int_ps", u.to_ps(lt.tau_int));
    s.add("tau_end_ps", u.to_ps(lt.tau_end));
    s.add("identity_residual_ps", u.to_ps(lt.identity_residual));
    s.add("tau_dwell_k0_ps", u.to_ps(lt.tau_dwell_k0));
    s.add("tau0_ref_ps", u.to_ps(lt.tau0_ref));
    s.add("tau_end_ref_ps", u.to_ps(lt.tau_end_ref));
    s.add("max_fd_disagreement", lt.max_fd_disagreement);
    if (direct) {
        s.add("tau_L_direct_ps", u.to_ps(direct->tau_L));
        s.add("direct_truncation", direct->truncation);
    }
    s.add("hbar_omega", u.to_ev(omega * UnitSystem::hbar));
    s.add("T_up", sp.T_up);
    s.add("T_down", sp.T_down);
    s.add("delta_phi", sp.delta_phi);
    s.add("phi0", sp.phi0);
    s.add("phi_end", sp.phi_end);
    s.add("precession_time_ps", u.to_ps(lr.f_omega));
    s.add("precession_time_half_ps", u.to_ps(lr.f_half));
    s.add("precession_time_extrapolated_ps", u.to_ps(lr.extrapolated));
    s.add("precession_relative_error", std::abs(lr.extrapolated - target) / std::abs(target));
    s.add("theta_spread", sp.theta_spread);
    s.add("theta_expected", sp.theta_expected);
    s.add("Sz_expected", sp.Sz_expected);
    s.add("max_Sz_error", sp.max_Sz_error);
    ctx.emit(s, "larmor_summary.csv");
}

}  // namespace

RunOutputs run_experiment(const ExperimentConfig& config, Experiment experiment, const fs::path& out, int threads) {
    if (config.experiment && *config.experiment != experiment)
        throw ConfigError("config selects experiment '" + experiment_name(*config.experiment) + "' but '" +
                          experiment_name(experiment) + "' was requested");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());

    Context ctx{config, config.units(), config.barrier(), config.basis_method(), out, threads, {}};
    try {
        switch (experiment) {
        case Experiment::Amplitudes: run_amplitudes(ctx); break;
        case Experiment::Times: run_times(ctx); break;
        case Experiment::PacketTrace: run_packet_trace(ctx); break;
        case Experiment::HartmanSweep: run_hartman(ctx); break;
        case Experiment::Larmor: run_larmor(ctx); break;
        }
    } catch (const NumericalError& e) {
        throw NumericalError(experiment_name(experiment) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(experiment_name(experiment) + ": " + e.what());
    }

    ExperimentConfig echoed = config;
    echoed.experiment = experiment;
    nlohmann::json manifest;
    manifest["tool"] = "subscat";
    manifest["version"] = SUBSCAT_VERSION;
    manifest["experiment"] = experiment_name(experiment);
    manifest["config"] = nlohmann::json::parse(serialize_config(echoed));
    ctx.resolved["k0"] = config.wavenumber() / ctx.units.length_unit;
    ctx.resolved["E0"] = ctx.units.to_ev(ctx.units.energy(config.wavenumber()));
    manifest["resolved"] = ctx.resolved;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : ctx.outputs.files) files.push_back(f.filename().string());
    manifest["outputs"] = files;
    const fs::path mpath = out / "manifest.json";
    std::ofstream m(mpath, std::ios::binary | std::ios::trunc);
    if (!m) throw ConfigError("cannot write " + mpath.string());
    m << manifest.dump(2) << '\n';
    ctx.outputs.files.push_back(mpath);
    return ctx.outputs;
}

}  // namespace subscat
