#include "subscat/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "subscat/errors.hpp"

namespace subscat {

using nlohmann::json;

std::string experiment_name(Experiment e) {
    switch (e) {
    case Experiment::Amplitudes: return "amplitudes";
    case Experiment::Times: return "times";
    case Experiment::PacketTrace: return "packet-trace";
    case Experiment::HartmanSweep: return "hartman-sweep";
    case Experiment::Larmor: return "larmor";
    }
    return "";
}

Experiment parse_experiment(const std::string& name) {
    for (Experiment e : {Experiment::Amplitudes, Experiment::Times, Experiment::PacketTrace, Experiment::HartmanSweep,
                         Experiment::Larmor})
        if (experiment_name(e) == name) return e;
    throw ConfigError("unknown experiment '" + name +
                      "' (expected amplitudes, times, packet-trace, hartman-sweep or larmor)");
}

std::vector<double> Grid::values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = count == 1 ? start
                          : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    if (count > 1) v.back() = stop;
    return v;
}

namespace {

std::size_t edit_distance(const std::string& x, const std::string& y) {
    std::vector<std::size_t> row(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (x[i - 1] != y[j - 1])});
            diag = up;
        }
    }
    return row[y.size()];
}

// A JSON object with its dotted path; every key must be consumed.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError("config field '" + name(key) + "': " + what);
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!has(key)) {
            for (auto it = j_.begin(); it != j_.end(); ++it)
                if (!used_.count(it.key()) && edit_distance(it.key(), key) <= 2)
                    fail(key, "is required (found '" + it.key() + "')");
            fail(key, "is required");
        }
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(key, "must be a number");
        double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }
    double positive(const std::string& key) {
        double d = number(key);
        if (!(d > 0.0)) fail(key, "must be positive");
        return d;
    }
    std::size_t count(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "must be a non-negative integer");
        return v.get<std::size_t>();
    }
    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
    }
    bool boolean(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_boolean()) fail(key, "must be true or false");
        return v.get<bool>();
    }
    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) fail(key, "must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) fail(key, "must be an array of finite numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    Node child(const std::string& key) { return Node(raw(key), name(key)); }

    // Raises for the first key that was never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(it.key(), "unknown key");
    }

    std::string name(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Grid read_grid(Node node, bool positive_range) {
    Grid g;
    g.start = node.number("start");
    g.stop = node.number("stop");
    g.count = node.count("count");
    if (g.count < 2) node.fail("count", "must be at least 2");
    if (!(g.stop > g.start)) node.fail("stop", "must exceed start");
    if (positive_range && !(g.start > 0.0)) node.fail("start", "must be positive");
    node.finish();
    return g;
}

json grid_json(const Grid& g) { return json{{"start", g.start}, {"stop", g.stop}, {"count", g.count}}; }

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void validate(const ExperimentConfig& c) {
    // Building the objects runs the library's own checks; report them as
    // configuration problems.
    try {
        (void)c.units();
        (void)c.barrier();
        (void)c.profile();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
}

}  // namespace

UnitSystem ExperimentConfig::units() const {
    return unit_system == "natural" ? UnitSystem::natural(mass) : UnitSystem::nm_ev(mass);
}

Barrier ExperimentConfig::barrier() const {
    const UnitSystem u = units();
    if (barrier_kind == "rectangular") return make_rectangular(u.from_nm(a), u.from_nm(b), u.from_ev(height));
    if (barrier_kind == "piecewise") {
        std::vector<Segment> segs;
        for (const auto& s : segments) segs.push_back({u.from_nm(s.width), u.from_ev(s.height)});
        return make_piecewise(u.from_nm(a), segs);
    }
    std::vector<double> v;
    for (double s : samples) v.push_back(u.from_ev(s));
    return make_sampled(u.from_nm(a), u.from_nm(b), v);
}

BasisMethod ExperimentConfig::basis_method() const {
    return method == "integrate" ? BasisMethod::Integrate : BasisMethod::Automatic;
}

double ExperimentConfig::wavenumber() const {
    const UnitSystem u = units();
    if (k0) return *k0 * u.length_unit;
    return u.wavenumber(u.from_ev(*E0));
}

SpectralProfile ExperimentConfig::profile() const {
    return build_profile(wavenumber(), units().from_nm(l0), n_samples, halfwidth_sigmas);
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream msg;
        msg << "config syntax error at line " << line_of(text, e.byte) << ": " << e.what();
        throw ConfigError(msg.str());
    }
    ExperimentConfig c;
    Node top(root, "");

    {
        Node u = top.child("units");
        c.unit_system = u.string("system");
        if (c.unit_system != "nm_ev" && c.unit_system != "natural")
            u.fail("system", "must be \"nm_ev\" or \"natural\"");
        if (u.has("mass")) c.mass = u.positive("mass");
        u.finish();
    }
    {
        Node bn = top.child("barrier");
        c.barrier_kind = bn.string("kind");
        c.a = bn.positive("a");
        if (c.barrier_kind == "rectangular") {
            c.b = bn.positive("b");
            c.height = bn.number("height");
            if (c.height < 0.0) bn.fail("height", "must be non-negative");
        } else if (c.barrier_kind == "piecewise") {
            const json& segs = bn.raw("segments");
            if (!segs.is_array() || segs.empty()) bn.fail("segments", "must be a non-empty array");
            std::size_t i = 0;
            for (const auto& s : segs) {
                Node sn(s, bn.name("segments") + "[" + std::to_string(i++) + "]");
                Segment seg{sn.positive("width"), sn.number("height")};
                if (seg.height < 0.0) sn.fail("height", "must be non-negative");
                sn.finish();
                c.segments.push_back(seg);
            }
            c.b = c.a;
            for (const auto& s : c.segments) c.b += s.width;
        } else if (c.barrier_kind == "sampled") {
            c.b = bn.positive("b");
            c.samples = bn.numbers("samples");
            if (c.samples.size() < 4) bn.fail("samples", "needs at least 4 values");
            for (double s : c.samples)
                if (s < 0.0) bn.fail("samples", "values must be non-negative");
        } else {
            bn.fail("kind", "must be \"rectangular\", \"piecewise\" or \"sampled\"");
        }
        if (!(c.b > c.a)) bn.fail("b", "must exceed a");
        bn.finish();
    }
    if (top.has("method")) {
        c.method = top.string("method");
        if (c.method != "automatic" && c.method != "integrate") top.fail("method", "must be \"automatic\" or \"integrate\"");
    }
    {
        Node p = top.child("profile");
        if (p.has("E0") == p.has("k0")) p.fail("", "needs exactly one of E0 and k0");
        if (p.has("E0")) c.E0 = p.positive("E0");
        if (p.has("k0")) c.k0 = p.positive("k0");
        c.l0 = p.positive("l0");
        if (p.has("n_samples")) {
            c.n_samples = p.count("n_samples");
            if (c.n_samples < 64) p.fail("n_samples", "must be at least 64");
        }
        if (p.has("halfwidth_sigmas")) c.halfwidth_sigmas = p.positive("halfwidth_sigmas");
        p.finish();
    }
    if (top.has("experiment")) c.experiment = parse_experiment(top.string("experiment"));
    if (top.has("time_grid")) c.time_grid = read_grid(top.child("time_grid"), false);
    if (top.has("energy_grid")) c.energy_grid = read_grid(top.child("energy_grid"), true);
    if (top.has("sweep")) {
        Node s = top.child("sweep");
        if (s.has("widths")) {
            c.widths = s.numbers("widths");
            if (c.widths.empty()) s.fail("widths", "must not be empty");
            for (double w : c.widths)
                if (!(w > 0.0)) s.fail("widths", "values must be positive");
        } else {
            Grid g;
            g.start = s.positive("d_min");
            g.stop = s.positive("d_max");
            g.count = s.count("count");
            if (g.count < 2) s.fail("count", "must be at least 2");
            if (!(g.stop > g.start)) s.fail("d_max", "must exceed d_min");
            c.widths = g.values();
        }
        s.finish();
    }
    if (top.has("larmor")) {
        Node l = top.child("larmor");
        if (l.has("omega")) c.omega = l.positive("omega");
        if (l.has("direct")) c.direct_larmor = l.boolean("direct");
        l.finish();
    }
    if (top.has("seed")) c.seed = top.count("seed");
    top.finish();
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    json j;
    j["units"] = {{"system", c.unit_system}, {"mass", c.mass}};
    json bar{{"kind", c.barrier_kind}, {"a", c.a}};
    if (c.barrier_kind == "rectangular") {
        bar["b"] = c.b;
        bar["height"] = c.height;
    } else if (c.barrier_kind == "piecewise") {
        bar["segments"] = json::array();
        for (const auto& s : c.segments) bar["segments"].push_back({{"width", s.width}, {"height", s.height}});
    } else {
        bar["b"] = c.b;
        bar["samples"] = c.samples;
    }
    j["barrier"] = bar;
    j["method"] = c.method;
    json prof{{"l0", c.l0}, {"n_samples", c.n_samples}, {"halfwidth_sigmas", c.halfwidth_sigmas}};
    if (c.E0) prof["E0"] = *c.E0;
    if (c.k0) prof["k0"] = *c.k0;
    j["profile"] = prof;
    if (c.experiment) j["experiment"] = experiment_name(*c.experiment);
    if (c.time_grid) j["time_grid"] = grid_json(*c.time_grid);
    if (c.energy_grid) j["energy_grid"] = grid_json(*c.energy_grid);
    if (!c.widths.empty()) j["sweep"] = {{"widths", c.widths}};
    json lar{{"direct", c.direct_larmor}};
    if (c.omega) lar["omega"] = *c.omega;
    j["larmor"] = lar;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

std::vector<std::string> preset_names() { return {"fig1", "e-half-v0", "free"}; }

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    if (name == "fig1" || name == "free") {
        // GaAs-like effective mass; the free-electron mass gives much faster packets.
        c.unit_system = "nm_ev";
        c.mass = 0.067;
        c.barrier_kind = "rectangular";
        c.a = 200.0;
        c.b = 215.0;
        c.height = name == "fig1" ? 0.2 : 0.0;
        c.E0 = 0.05;
        c.l0 = 10.0;
        c.n_samples = 2048;
        // Widest grid that keeps every wavenumber positive for l0 = 10 nm.
        c.halfwidth_sigmas = 4.15;
        c.experiment = Experiment::Times;
        c.time_grid = Grid{0.0, 1.05, 201};
    } else if (name == "e-half-v0") {
        c.unit_system = "natural";
        c.mass = 1.0;
        c.barrier_kind = "rectangular";
        c.a = 1000.0;
        c.b = 1002.0;
        c.height = 1.0;
        c.k0 = 1.0;
        c.l0 = 400.0;
        c.n_samples = 768;
        c.halfwidth_sigmas = 8.0;
        c.experiment = Experiment::Larmor;
        c.time_grid = Grid{1000.0 - 12.0 * c.l0, 1002.0 + 12.0 * c.l0, 33};
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected fig1, e-half-v0 or free)");
    }
    validate(c);
    return c;
}

}  // namespace subscat
