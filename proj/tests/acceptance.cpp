// Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   acceptance --cli <path to subscat> --work <dir> [criterion ...]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "subscat/config.hpp"
#include "subscat/experiments.hpp"
#include "subscat/larmor.hpp"
#include "subscat/stationary.hpp"
#include "subscat/timing.hpp"
#include "subscat/wavepacket.hpp"

using namespace subscat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Env {
    fs::path cli;
    fs::path work;
    std::map<std::string, double> preset_seconds;  // first CLI run of each preset
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_cli(const Env& env, const std::string& args) {
    const std::string cmd = "\"" + env.cli.string() + "\" " + args + " > /dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Runs `subscat preset <name>` into <work>/<tag>/<name> and returns the directory.
fs::path run_preset(Env& env, const std::string& name, const std::string& tag) {
    const fs::path dir = env.work / tag / name;
    fs::remove_all(dir);
    const auto t0 = std::chrono::steady_clock::now();
    const int code = run_cli(env, "preset " + name + " --out \"" + dir.string() + "\"");
    if (code != 0) throw std::runtime_error("subscat preset " + name + " exited with " + std::to_string(code));
    if (!env.preset_seconds.count(name)) env.preset_seconds[name] = seconds_since(t0);
    return dir;
}

std::map<std::string, double> read_summary(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + path.string());
    std::map<std::string, double> out;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    return out;
}

std::vector<std::vector<double>> read_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

// ---- 1 ----------------------------------------------------------------------

Barrier random_barrier(std::mt19937_64& rng, bool piecewise) {
    std::uniform_real_distribution<double> ua(1.0, 50.0), ud(0.2, 8.0), uv(0.0, 4.0), uw(0.1, 2.0);
    const double a = ua(rng);
    if (!piecewise) {
        const double d = ud(rng);
        return make_rectangular(a, a + d, uv(rng));
    }
    std::uniform_int_distribution<int> un(1, 3), ub(0, 1);
    const int half = un(rng);
    std::vector<Segment> left;
    for (int i = 0; i < half; ++i) left.push_back({uw(rng), uv(rng)});
    std::vector<Segment> segs = left;
    if (ub(rng)) segs.push_back({uw(rng), uv(rng)});
    for (auto it = left.rbegin(); it != left.rend(); ++it) segs.push_back(*it);
    return make_piecewise(a, segs);
}

Outcome criterion1(Env&) {
    const UnitSystem u = UnitSystem::natural();
    std::mt19937_64 rng(20261017);
    std::uniform_real_distribution<double> ue(0.02, 5.0);
    double unit = 0.0, sum_in = 0.0, norm_in = 0.0, a_mod = 0.0, decomp = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Barrier bar = random_barrier(rng, i % 2 == 1);
        const double k = u.wavenumber(ue(rng));
        const BasisMethod m = i % 10 == 0 ? BasisMethod::Integrate : BasisMethod::Automatic;
        const StationaryTriple tri = solve_stationary(bar, k, u, m);
        const auto& A = tri.amplitudes();
        unit = std::max(unit, std::abs(A.T + A.R - 1.0));
        sum_in = std::max(sum_in, std::abs(A.A_tr_in + A.A_ref_in - 1.0));
        norm_in = std::max(norm_in, std::abs(std::norm(A.A_tr_in) + std::norm(A.A_ref_in) - 1.0));
        a_mod = std::max(a_mod, std::abs(std::abs(A.a_tr) - std::abs(A.a_full)) / std::abs(A.a_full));
        for (int j = 0; j <= 40; ++j) {
            const double x = bar.a() - 1.0 + (bar.width() + 2.0) * j / 40.0;
            const cplx f = tri(Field::Full, x), t = tri(Field::Transmitted, x), r = tri(Field::Reflected, x);
            const double scale = std::max({1.0, std::abs(f), std::abs(t), std::abs(r)});
            decomp = std::max(decomp, std::abs(t + r - f) / scale);
        }
    }
    const bool pass = unit <= 1e-10 && sum_in <= 1e-10 && norm_in <= 1e-10 && a_mod <= 1e-9 && decomp <= 1e-9;
    return {pass, "1000 barriers: |T+R-1| " + fmt(unit) + ", |A_tr+A_ref-1| " + fmt(sum_in) +
                      ", ||A_tr|^2+|A_ref|^2-1| " + fmt(norm_in) + ", |a_tr|/|a_full|-1 " + fmt(a_mod) +
                      ", psi_tr+psi_ref-psi_full " + fmt(decomp)};
}

// ---- 2 ----------------------------------------------------------------------

// d_gr, tau0 and tau_end from the transfer-matrix amplitudes by Richardson
// central differences in k and in the barrier height.
struct TransferTimes {
    double d_gr, tau0, tau_end;
};

TransferTimes transfer_times(const Barrier& bar, double k, const UnitSystem& u) {
    auto amps = [&](const Barrier& b, double kk) { return transfer_matrix_oracle(b, kk, u); };
    auto wrap = [](double x) { return std::remainder(x, 2.0 * std::numbers::pi); };
    auto dgr_at = [&](double h) {
        auto p = amps(bar, k + h), m = amps(bar, k - h);
        auto in = [](const TransferAmplitudes& t) { return std::arg(std::conj(t.a_out) * (t.a_out + t.b_out)); };
        return (wrap(std::arg(p.a_out) - std::arg(m.a_out)) - wrap(in(p) - in(m))) / (2.0 * h);
    };
    const double hk = 1e-4 * k;
    const double d_gr = (4.0 * dgr_at(0.5 * hk) - dgr_at(hk)) / 3.0;

    const TransferAmplitudes base = amps(bar, k);
    const double hv = 1e-6 * std::max(bar.scale(), u.energy(k));
    auto deriv = [&](auto get) {
        auto q = [&](double h) {
            return (get(amps(bar.shifted(h), k)) - get(amps(bar.shifted(-h), k))) / (2.0 * h);
        };
        return 0.5 * (4.0 * q(0.5 * hv) - q(hv)) / 3.0;
    };
    auto a_out = [](const TransferAmplitudes& t) { return t.a_out; };
    auto a_tr = [](const TransferAmplitudes& t) { return std::conj(t.a_out) * (t.a_out + t.b_out); };
    const double T = std::norm(base.a_out);
    const cplx ta = deriv(a_out);
    const cplx tA = deriv(a_tr);
    return {d_gr, 2.0 * std::imag(std::conj(tA) * a_tr(base)) / T, 2.0 * std::imag(std::conj(ta) * base.a_out) / T};
}

Outcome criterion2(Env&) {
    const UnitSystem u = UnitSystem::natural();
    const double a = 10.0;
    std::map<std::string, double> worst;
    auto track = [&](const std::string& name, double x, double y, double floor) {
        const double e = std::abs(x - y) / std::max({std::abs(x), std::abs(y), floor});
        worst[name] = std::max(worst[name], e);
    };
    int points = 0;
    for (double v0 : {0.5, 1.0, 2.0, 4.0, 8.0})
        for (double d : {0.5, 1.0, 2.0, 3.0, 5.0})
            for (double ratio : {0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.5, 2.5}) {
                ++points;
                const Barrier bar = make_rectangular(a, a + d, v0);
                const double k = u.wavenumber(ratio * v0);
                const double t_free = u.mass_over_hbar() * d / k;
                const OracleRecord o = rectangular_oracle(bar, k, u);
                const StationaryTriple tri = solve_stationary(bar, k, u, BasisMethod::Integrate);
                const TransferAmplitudes tm = transfer_matrix_oracle(bar, k, u);
                const TransferTimes tt = transfer_times(bar, k, u);
                const double dgr = group_length(bar, k, u, 0.0, BasisMethod::Integrate);
                const DwellResult dw = dwell_time(bar, k, u, BasisMethod::Integrate);
                const LarmorClocks lc = larmor_clocks(bar, k, u, BasisMethod::Integrate);
                const double J_closed = std::arg(tm.a_out);  // the closed forms carry no phase
                track("T", tri.amplitudes().T, o.transmission, 0.0);
                track("T", std::norm(tm.a_out), o.transmission, 0.0);
                track("arg a_out", tri.amplitudes().J, J_closed, std::numbers::pi);
                track("d_gr", dgr, o.d_gr, d);
                track("d_gr", tt.d_gr, o.d_gr, d);
                track("tau_dwell", dw.tau_dwell, o.tau_dwell, t_free);
                track("tau0", lc.tau0, o.tau0, t_free);
                track("tau0", tt.tau0, o.tau0, t_free);
                track("tau_end", lc.tau_end, o.tau_end, t_free);
                track("tau_end", tt.tau_end, o.tau_end, t_free);
            }
    bool pass = points == 200;
    std::string detail = std::to_string(points) + " lattice points, worst relative gap:";
    for (const auto& [k, v] : worst) {
        pass = pass && v <= 1e-8;
        detail += " " + k + " " + fmt(v, 3) + ";";
    }
    return {pass, detail};
}

// ---- 3 ----------------------------------------------------------------------

Outcome criterion3(Env&) {
    const UnitSystem u = UnitSystem::natural();
    const Barrier bar = make_rectangular(200.0, 202.0, 1.0);
    const double s2 = std::sinh(2.0), c2 = std::cosh(2.0), t2 = std::tanh(2.0);
    const std::map<std::string, double> exact{
        {"T", 1.0 / (c2 * c2)},        {"d_gr", (2.0 * s2 - 2.0) / c2}, {"tau_dwell", s2},
        {"tau_end", t2},               {"tau0", 2.0 / c2},             {"tau_int", t2 - 2.0 / c2 - s2}};
    double worst = 0.0;
    std::string worst_name;
    for (BasisMethod m : {BasisMethod::Automatic, BasisMethod::Integrate}) {
        const StationaryTriple tri = solve_stationary(bar, 1.0, u, m);
        const LarmorClocks lc = larmor_clocks(bar, 1.0, u, m);
        const std::map<std::string, double> got{{"T", tri.amplitudes().T},
                                                {"d_gr", group_length(bar, 1.0, u, 0.0, m)},
                                                {"tau_dwell", dwell_time(bar, 1.0, u, m).tau_dwell},
                                                {"tau_end", lc.tau_end},
                                                {"tau0", lc.tau0},
                                                {"tau_int", lc.tau_int}};
        for (const auto& [name, value] : got) {
            const double e = rel(value, exact.at(name));
            if (e > worst) {
                worst = e;
                worst_name = name;
            }
        }
    }
    return {worst <= 1e-6, "worst relative error " + fmt(worst, 3) + " (" + worst_name + "), both basis routes"};
}

// ---- 4 ----------------------------------------------------------------------

Outcome criterion4(Env& env) {
    const fs::path dir = run_preset(env, "fig1", "run1");
    const double secs = env.preset_seconds["fig1"];
    auto s = read_summary(dir / "times_summary.csv");
    auto trace = read_table(dir / "trace.csv");
    const double tf = s["tau_free_ps"], ta = s["tau_as_ps"], te = s["tau_exact_ps"];
    const bool free_ok = std::abs(tf - 0.025) <= 0.15 * 0.025;
    const bool as_ok = std::abs(ta - 0.01) <= 0.25 * 0.01;
    const bool ex_ok = std::abs(te - 0.155) <= 0.15 * 0.155;
    const auto& last = trace.back();
    const bool ahead = last[1] > last[2];
    const bool fast = secs < 300.0;
    return {free_ok && as_ok && ex_ok && ahead && fast,
            "tau_free " + fmt(tf) + " ps (" + (free_ok ? "in" : "OUT of") + " 0.025+-15%), tau_as " + fmt(ta) +
                " ps (" + (as_ok ? "in" : "OUT of") + " 0.01+-25%), tau_exact " + fmt(te) + " ps (" +
                (ex_ok ? "in" : "OUT of") + " 0.155+-15%), late lead of the transmitted CM " +
                fmt(last[1] - last[2]) + " nm, " + fmt(secs, 3) + " s"};
}

// ---- 5 ----------------------------------------------------------------------

Outcome criterion5(Env& env) {
    ExperimentConfig wide = preset("fig1");
    wide.experiment = Experiment::PacketTrace;
    run_experiment(wide, Experiment::PacketTrace, env.work / "c5" / "fig1");
    const double dev_wide = read_summary(env.work / "c5" / "fig1" / "packet_trace_summary.csv")["max_deviation_over_T"];

    ExperimentConfig narrow = preset("fig1");
    narrow.experiment = Experiment::PacketTrace;
    narrow.l0 = 200.0;
    narrow.n_samples = 1024;
    narrow.halfwidth_sigmas = 8.0;
    narrow.time_grid.reset();  // the default grid starts before the packet reaches the barrier
    run_experiment(narrow, Experiment::PacketTrace, env.work / "c5" / "fig1-l0-200");
    const double dev_narrow =
        read_summary(env.work / "c5" / "fig1-l0-200" / "packet_trace_summary.csv")["max_deviation_over_T"];
    return {dev_wide <= 0.05 && dev_narrow <= 1e-3,
            "max|T(t) - (1-R)| / T: fig1 " + fmt(dev_wide) + " (limit 0.05), l0 = 200 nm " + fmt(dev_narrow) +
                " (limit 1e-3)"};
}

// ---- 6 ----------------------------------------------------------------------

Outcome criterion6(Env&) {
    const UnitSystem u = UnitSystem::natural();
    std::vector<double> widths;
    for (int i = 0; i < 10; ++i) widths.push_back(3.0 + i);  // kappa_b = 1
    HartmanSweep sw = hartman_sweep(1.0, 1.0, widths, u);
    HartmanChecks hc = check_hartman(sw);
    const bool ratio_ok = hc.int_to_dwell_ratio >= 0.5 && hc.int_to_dwell_ratio <= 1.0;
    const bool pass = hc.tau_end_monotone && hc.final_gap <= 1e-3 && hc.dwell_slope_error <= 0.01 &&
                      hc.tau_int_negative && ratio_ok;
    return {pass, std::string("tau_end monotone ") + (hc.tau_end_monotone ? "yes" : "no") + ", final gap " +
                      fmt(hc.final_gap, 3) + ", log tau_dwell slope / kappa_b - 1 = " + fmt(hc.dwell_slope_error, 3) +
                      ", tau_int < 0 " + (hc.tau_int_negative ? "yes" : "no") + ", |tau_int|/tau_dwell " +
                      fmt(hc.int_to_dwell_ratio)};
}

// ---- 7 ----------------------------------------------------------------------

Outcome criterion7(Env& env) {
    const fs::path dir = run_preset(env, "e-half-v0", "run1");
    const double secs = env.preset_seconds["e-half-v0"];
    auto s = read_summary(dir / "larmor_summary.csv");
    const double scale = std::max(s["tau_dwell_k0_ps"], std::abs(s["tau_end_ps"]));
    const double resid = std::abs(s["identity_residual_ps"]) / scale;
    const double prec = s["precession_relative_error"];
    const double theta = s["theta_spread"];
    const double sz = s["max_Sz_error"];
    const bool pass = resid <= 1e-4 && prec <= 1e-3 && theta <= 1e-6 && sz <= 1e-8 && secs < 300.0;
    return {pass, "identity residual " + fmt(resid, 3) + " of max(tau_dwell, tau_end), spinor precession vs "
                  "tau_L + tau_int " + fmt(prec, 3) + ", theta spread " + fmt(theta, 3) + ", max |Sz - expected| " +
                  fmt(sz, 3) + ", " + fmt(secs, 3) + " s"};
}

// ---- 8 ----------------------------------------------------------------------

Outcome criterion8(Env&) {
    const UnitSystem u = UnitSystem::natural();
    const Barrier bar = make_rectangular(100.0, 102.0, 1.0);
    struct Run {
        double residual = 0.0, peak_force = 0.0, peak_boundary = 0.0;
        bool ref_ok = true;
    };
    auto run = [&](double l0) {
        auto set = make_scattering_set(build_profile(1.0, l0, 768), bar, u);
        Run r;
        for (int i = -4; i <= 4; ++i) {
            const double t = 101.0 + 0.75 * l0 * i;
            EhrenfestTerms tr = ehrenfest_balance(*set, Field::Transmitted, t);
            EhrenfestTerms rf = ehrenfest_balance(*set, Field::Reflected, t);
            r.residual = std::max(r.residual, std::abs(tr.residual));
            r.peak_force = std::max(r.peak_force, std::abs(tr.force));
            r.peak_boundary = std::max(r.peak_boundary, std::abs(tr.boundary));
            r.ref_ok = r.ref_ok && rf.boundary <= 0.0;
        }
        return r;
    };
    const Run r1 = run(20.0), r2 = run(40.0);
    const double res1 = r1.residual / r1.peak_force, res2 = r2.residual / r2.peak_force;
    const double ratio = r2.peak_boundary / r1.peak_boundary;
    const bool pass = res1 < 1e-3 && res2 < 1e-3 && r1.ref_ok && r2.ref_ok && ratio < 0.5;
    return {pass, "transmitted residual / peak force " + fmt(res1, 3) + " (l0 = 20), " + fmt(res2, 3) +
                      " (l0 = 40); reflected boundary term <= 0 " + (r1.ref_ok && r2.ref_ok ? "yes" : "no") +
                      "; transmitted boundary peak ratio on doubling l0 " + fmt(ratio)};
}

// ---- 9 ----------------------------------------------------------------------

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return fa && fb && sa.str() == sb.str();
}

Outcome criterion9(Env& env) {
    std::string detail;
    bool pass = true;
    for (const auto& name : preset_names()) {
        const fs::path first = env.preset_seconds.count(name) ? env.work / "run1" / name : run_preset(env, name, "run1");
        const fs::path second = run_preset(env, name, "run2");
        std::size_t files = 0, differing = 0;
        for (const auto& entry : fs::directory_iterator(first)) {
            ++files;
            if (!same_bytes(entry.path(), second / entry.path().filename())) ++differing;
        }
        std::size_t second_files = std::distance(fs::directory_iterator(second), fs::directory_iterator{});
        const bool ok = differing == 0 && files == second_files && files > 0;
        pass = pass && ok;
        detail += name + ": " + std::to_string(files) + " files, " + std::to_string(differing) + " differ; ";
    }
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    Env env;
    env.work = fs::current_path() / "acceptance_work";
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) {
            env.cli = argv[++i];
        } else if (arg == "--work" && i + 1 < argc) {
            env.work = argv[++i];
        } else {
            selected.push_back(std::stoi(arg));
        }
    }
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    fs::create_directories(env.work);

    const std::vector<std::pair<std::string, std::function<Outcome(Env&)>>> criteria{
        {"unitarity and decomposition", criterion1},   {"oracle equivalence", criterion2},
        {"analytic test point", criterion3},           {"fig1 reproduction", criterion4},
        {"wide-packet deviation", criterion5},         {"Hartman behaviour", criterion6},
        {"Larmor identity", criterion7},               {"Ehrenfest balance", criterion8},
        {"determinism", criterion9}};

    int failures = 0;
    for (int n : selected) {
        if (n < 1 || n > 9) {
            std::cerr << "unknown criterion " << n << '\n';
            return 2;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[n - 1].second(env);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " [" << criteria[n - 1].first
                  << "] " << o.detail << " (" << fmt(seconds_since(t0), 3) << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
