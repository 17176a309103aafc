#pragma once

#include "swr/schwarz.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <sstream>

#ifndef SWR_PRESET_DIR
#define SWR_PRESET_DIR "presets"
#endif

namespace swr {

namespace pt = boost::property_tree;

struct InitialSpec {
    // exp(-a1 (x1-c1)^2 - a2 (x2-c2)^2), optionally minus its mirror image.
    double a1 = 1.0, a2 = 1.0, c1 = 0.0, c2 = 0.0;
    bool antisymmetric = false;
    bool normalize = false;

    double operator()(double x1, double x2) const {
        auto g = [&](double u, double v) { return std::exp(-a1 * (u - c1) * (u - c1) - a2 * (v - c2) * (v - c2)); };
        return antisymmetric ? g(x1, x2) - g(x2, x1) : g(x1, x2);
    }
};

struct RunConfig {
    std::string name = "custom";
    std::string source;  // file the config was read from
    RunMode mode = RunMode::heat;
    bool project_only = false;  // build bases and project the initial data, no time stepping

    // domain
    double a = -15, b = 15, c = -15, d = 15;
    int n1 = 201, n2 = 201;
    int L = 5;
    OverlapSpec overlap{std::nullopt, std::nullopt, 0.1};

    // basis
    BasisKind basis = BasisKind::gaussian;
    int n_phi = 6;
    double delta = 0.4;
    int orbitals_per_block = 0;   // 0 -> n_phi + 1
    int determinants = 0;         // 0 -> n_phi (n_phi + 1) / 2
    std::optional<double> x_b;    // default: half the padded block width
    BarrierSpec barrier;
    bool mollify_orbitals = true;
    BoundaryGaussianSpec augment;

    // potential
    PotentialSpec potential;
    CoulombSmoothing smoothing = CoulombSmoothing::radial;

    TransmissionSpec tc;

    // time
    double dt = 0.1;
    double T = 1.0;
    NgfConfig ngf;
    std::optional<double> shift;  // unset -> minimum of the potential table
    LaserField laser;
    bool field = true;

    // Schwarz
    double delta_sc = 1e-10;
    int max_iterations = 60;
    ResidualMode residual = ResidualMode::successive;
    int workers = 0;  // 0 -> hardware concurrency

    InitialSpec initial;

    // output
    std::string out_dir;
    int dump_stride = 0;
    bool dump_csv = false;

    int steps() const { return static_cast<int>(std::lround(T / dt)); }

    void validate() const {
        require(b > a && d > c, "domain: bounds must satisfy a < b and c < d");
        require(n1 >= 3 && n2 >= 3, "domain: at least three grid points per axis");
        require(L >= 1, "domain.L must be at least 1");
        require(n_phi >= 1, "basis.n_phi must be at least 1");
        require(delta > 0, "basis.delta must be positive");
        if (basis != BasisKind::gaussian) require(a == c && b == d && n1 == n2, "basis: determinant bases need a square grid");
        if (mode == RunMode::tdse) {
            require(tc.kind == TransmissionKind::dirichlet || tc.mu.imag() != 0.0 || tc.mu.real() != 0.0,
                    "transmission.mu must be nonzero");
        } else {
            require(tc.mu.imag() == 0.0, "transmission.mu_imag must be 0 outside real-time runs");
        }
        require(dt > 0, "time.dt must be positive");
        if (mode != RunMode::ngf) require(T > 0 && steps() >= 1, "time.T must cover at least one step");
        require(delta_sc > 0, "swr.delta_sc must be positive");
        require(max_iterations >= 1, "swr.max_iterations must be at least 1");
        require(dump_stride >= 0, "output.dump_stride must be nonnegative");
        potential.nuclei.validate();
        barrier.validate();
        potential.mollifier.validate();
    }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw Error("config " + key + ": cannot parse '" + tok + "' as a number");
        }
    }
    return out;
}

template <class E>
E parse_enum(const std::string& v, const std::type_identity_t<std::vector<std::pair<std::string, E>>>& opts,
             const std::string& key) {
    for (const auto& [n, e] : opts)
        if (n == v) return e;
    std::string all;
    for (const auto& o : opts) all += (all.empty() ? "" : ", ") + o.first;
    throw Error("config " + key + ": unknown value '" + v + "' (expected one of " + all + ")");
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error("config " + key + ": expected a boolean, got '" + v + "'");
}

// Typed reader that remembers which keys were consumed so that typos surface.
class Reader {
public:
    explicit Reader(const pt::ptree& t) : t_(t) {}

    std::optional<std::string> str(const std::string& key) {
        used_.insert(key);
        if (auto v = t_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return *v;
        return std::nullopt;
    }
    template <class T> void num(const std::string& key, T& out) {
        if (auto v = str(key)) {
            try {
                std::size_t used = 0;
                const double x = std::stod(*v, &used);
                if (used != v->size()) throw std::invalid_argument(*v);
                if constexpr (std::is_integral_v<T>) {
                    if (x != std::floor(x)) throw std::invalid_argument(*v);
                }
                out = static_cast<T>(x);
            } catch (const std::exception&) {
                throw Error("config " + key + ": cannot parse '" + *v + "' as a number");
            }
        }
    }
    template <class T> void num(const std::string& key, std::optional<T>& out) {
        if (auto v = str(key)) {
            T x{};
            num(key, x);
            out = x;
        }
    }
    void flag(const std::string& key, bool& out) {
        if (auto v = str(key)) out = parse_bool(*v, key);
    }

    void check_unused() const {
        for (const auto& [sec, body] : t_) {
            if (body.empty() && !body.data().empty()) throw Error("config: key '" + sec + "' outside a section");
            for (const auto& [k, v] : body) {
                (void)v;
                const std::string key = sec + "." + k;
                if (!used_.count(key)) throw Error("config: unknown key " + key);
            }
        }
    }

private:
    const pt::ptree& t_;
    std::set<std::string> used_;
};

}  // namespace detail

inline const std::vector<std::pair<std::string, RunMode>>& mode_names() {
    static const std::vector<std::pair<std::string, RunMode>> v{
        {"heat", RunMode::heat}, {"ngf", RunMode::ngf}, {"tdse", RunMode::tdse}};
    return v;
}

inline std::string mode_name(RunMode m) {
    for (const auto& [n, e] : mode_names())
        if (e == m) return n;
    return "?";
}

inline RunConfig parse_config(const pt::ptree& tree, const std::string& source = "") {
    using namespace detail;
    RunConfig c;
    c.source = source;
    Reader r(tree);
    if (auto v = r.str("scenario.name")) c.name = *v;
    if (auto v = r.str("scenario.mode")) {
        if (*v == "project") {
            c.project_only = true;
        } else {
            c.mode = parse_enum<RunMode>(*v, mode_names(), "scenario.mode");
        }
    }
    r.str("scenario.description");

    r.num("domain.a", c.a);
    r.num("domain.b", c.b);
    c.c = c.a;
    c.d = c.b;
    r.num("domain.c", c.c);
    r.num("domain.d", c.d);
    r.num("domain.n1", c.n1);
    c.n2 = c.n1;
    r.num("domain.n2", c.n2);
    r.num("domain.L", c.L);
    {
        std::optional<double> frac, width;
        r.num("domain.overlap_fraction", frac);
        r.num("domain.overlap_width", width);
        require(!(frac && width), "config domain: give overlap_fraction or overlap_width, not both");
        if (width) c.overlap = OverlapSpec{width, width, std::nullopt};
        if (frac) c.overlap = OverlapSpec{std::nullopt, std::nullopt, frac};
    }

    if (auto v = r.str("basis.kind"))
        c.basis = parse_enum<BasisKind>(*v,
                             {{"gaussian", BasisKind::gaussian},
                              {"slater", BasisKind::slater},
                              {"gaussian-determinant", BasisKind::gaussian_determinant},
                              {"augmented", BasisKind::augmented}},
                             "basis.kind");
    r.num("basis.n_phi", c.n_phi);
    r.num("basis.delta", c.delta);
    r.num("basis.orbitals_per_block", c.orbitals_per_block);
    r.num("basis.determinants", c.determinants);
    r.num("basis.x_b", c.x_b);
    r.num("basis.eps_b", c.barrier.eps_b);
    r.num("basis.v_inf", c.barrier.v_inf);
    r.flag("basis.mollify", c.mollify_orbitals);
    r.num("basis.aug_delta", c.augment.delta);
    r.num("basis.aug_per_side", c.augment.per_side);
    r.num("basis.aug_drop_ratio", c.augment.drop_ratio);

    auto& p = c.potential;
    if (auto v = r.str("potential.nuclear"))
        p.nuclear = parse_enum<NuclearModel>(*v,
                               {{"none", NuclearModel::none},
                                {"softcore", NuclearModel::softcore},
                                {"mollified", NuclearModel::mollified},
                                {"coulomb", NuclearModel::coulomb}},
                               "potential.nuclear");
    if (auto v = r.str("potential.positions")) p.nuclei.positions = parse_list(*v, "potential.positions");
    if (auto v = r.str("potential.charges")) p.nuclei.charges = parse_list(*v, "potential.charges");
    if (p.nuclei.charges.empty()) p.nuclei.charges.assign(p.nuclei.positions.size(), 1.0);
    r.num("potential.eta", p.eta);
    p.eta_ee = p.eta;
    if (auto v = r.str("potential.interaction"))
        p.interaction = parse_enum<InteractionModel>(*v,
                                   {{"none", InteractionModel::none},
                                    {"softcore", InteractionModel::softcore},
                                    {"mollified", InteractionModel::mollified}},
                                   "potential.interaction");
    r.num("potential.eta_ee", p.eta_ee);
    r.num("potential.mollifier_eps", p.mollifier.eps);
    r.num("potential.mollifier_order", p.mollifier.order);
    r.flag("potential.scale_4pi", p.scale_4pi);
    if (auto v = r.str("potential.smoothing"))
        c.smoothing = parse_enum<CoulombSmoothing>(*v, {{"radial", CoulombSmoothing::radial}, {"line", CoulombSmoothing::line}},
                                 "potential.smoothing");
    p.smoothing = c.smoothing;

    if (auto v = r.str("transmission.kind"))
        c.tc.kind = parse_enum<TransmissionKind>(*v, {{"robin", TransmissionKind::robin}, {"dirichlet", TransmissionKind::dirichlet}},
                               "transmission.kind");
    {
        double re = c.tc.mu.real(), im = c.tc.mu.imag();
        r.num("transmission.mu", re);
        r.num("transmission.mu_imag", im);
        c.tc.mu = cplx(re, im);
    }
    r.num("transmission.penalty", c.tc.penalty);

    r.num("time.dt", c.dt);
    r.num("time.T", c.T);
    r.num("time.ngf_delta", c.ngf.delta);
    r.num("time.shift", c.shift);
    r.flag("time.normalize", c.ngf.normalize);
    r.flag("time.antisymmetrize", c.ngf.antisymmetrize);
    r.num("time.max_steps", c.ngf.max_steps);
    c.ngf.dt = c.dt;

    r.num("laser.E0", c.laser.E0);
    r.num("laser.omega0", c.laser.omega0);
    r.num("laser.nu0", c.laser.nu0);
    c.laser.T = c.T;
    r.num("laser.T", c.laser.T);
    if (auto v = r.str("laser.polarization"))
        c.laser.polarization = parse_enum<Polarization>(
            *v, {{"circular", Polarization::circular}, {"linear-scalar", Polarization::linear_scalar}},
            "laser.polarization");
    r.flag("laser.enabled", c.field);

    r.num("swr.delta_sc", c.delta_sc);
    r.num("swr.max_iterations", c.max_iterations);
    if (auto v = r.str("swr.residual"))
        c.residual = parse_enum<ResidualMode>(*v, {{"successive", ResidualMode::successive}, {"mismatch", ResidualMode::mismatch}},
                                "swr.residual");
    r.num("swr.workers", c.workers);

    r.num("initial.a1", c.initial.a1);
    c.initial.a2 = c.initial.a1;
    r.num("initial.a2", c.initial.a2);
    r.num("initial.c1", c.initial.c1);
    c.initial.c2 = c.initial.c1;
    r.num("initial.c2", c.initial.c2);
    r.flag("initial.antisymmetric", c.initial.antisymmetric);
    r.flag("initial.normalize", c.initial.normalize);

    if (auto v = r.str("output.dir")) c.out_dir = *v;
    r.num("output.dump_stride", c.dump_stride);
    r.flag("output.dump_csv", c.dump_csv);

    r.check_unused();
    c.validate();
    return c;
}

inline RunConfig parse_config_string(const std::string& text, const std::string& source = "<string>") {
    std::istringstream is(text);
    pt::ptree t;
    try {
        pt::read_ini(is, t);
    } catch (const pt::ini_parser_error& e) {
        throw Error("config " + source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    return parse_config(t, source);
}

// Resolves a preset name against the preset directory, or reads a path.
inline std::string resolve_config_path(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (fs::exists(name_or_path) && fs::is_regular_file(name_or_path)) return name_or_path;
    const fs::path preset = fs::path(SWR_PRESET_DIR) / (name_or_path + ".ini");
    if (fs::exists(preset)) return preset.string();
    throw Error("no config file or preset named '" + name_or_path + "' (looked in " + std::string(SWR_PRESET_DIR) + ")");
}

// Reads a preset or file and applies "section.key=value" overrides.
inline RunConfig load_config(const std::string& name_or_path, const std::vector<std::string>& overrides = {}) {
    const std::string path = resolve_config_path(name_or_path);
    pt::ptree t;
    try {
        pt::read_ini(path, t);
    } catch (const pt::ini_parser_error& e) {
        throw Error("config " + path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        require(eq != std::string::npos && o.find('.') < eq, "override '" + o + "' is not of the form section.key=value");
        t.put(pt::ptree::path_type(o.substr(0, eq), '.'), o.substr(eq + 1));
    }
    return parse_config(t, path);
}

inline std::vector<std::string> preset_names() {
    namespace fs = std::filesystem;
    std::vector<std::string> out;
    if (!fs::exists(SWR_PRESET_DIR)) return out;
    for (const auto& e : fs::directory_iterator(SWR_PRESET_DIR))
        if (e.path().extension() == ".ini") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace swr
