#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "orthosmooth/csv_io.hpp"
#include "orthosmooth/error.hpp"
#include "orthosmooth/global_smoother.hpp"
#include "orthosmooth/local_smoother.hpp"
#include "orthosmooth/ortho_basis.hpp"
#include "orthosmooth/theory.hpp"

namespace orthosmooth::cli {

namespace fs = std::filesystem;

namespace {

struct KeyInfo {
    const char* key;
    const char* help;
};

constexpr KeyInfo kKeys[] = {
    {"command", "fit-global | fit-local | dof-curve | theory-density | simulate"},
    {"input", "CSV with columns x, y and optionally group"},
    {"out", "output directory"},
    {"degree", "number of orthogonal polynomial columns d"},
    {"bandwidth", "local window half-width h"},
    {"min-neighbors", "smallest local neighborhood (default d + 3)"},
    {"a1", "prior shape of tau^-2"},
    {"a2", "prior rate of tau^-2"},
    {"v0", "spike scale"},
    {"iters", "Gibbs sweeps"},
    {"burnin", "discarded sweeps"},
    {"thin", "keep every thin-th sweep"},
    {"seed", "sampler seed"},
    {"jobs", "worker threads for local fits"},
    {"curve", "synthetic mean: sine | piecewise-flat | polynomial"},
    {"coefficients", "polynomial coefficients, comma separated, constant first"},
    {"noise", "synthetic noise standard deviation"},
    {"n", "synthetic sample size"},
    {"xmin", "synthetic design start"},
    {"xmax", "synthetic design end"},
    {"amplitude", "synthetic amplitude"},
    {"frequency", "synthetic frequency (cycles per unit x)"},
    {"phase", "synthetic phase"},
    {"breakpoint", "piecewise-flat switch point"},
    {"data-seed", "synthetic noise seed"},
    {"scenario", "simulate: curve | sparse | overparam | null-limit"},
    {"fit", "simulate curve: global | local"},
    {"signal", "sparse scenario signal size in noise units"},
    {"w", "theory-density prior mixing weight"},
    {"quad-points", "theory-density quadrature nodes"},
    {"kernel-index", "fit-global: also write the effective kernel at this point"},
    {"dump-basis", "fit-global: also write the basis columns"},
};

const std::set<std::string> kSyntheticKeys = {"curve",     "coefficients", "noise",      "n",        "xmin",
                                              "xmax",      "amplitude",    "frequency",  "phase",    "breakpoint",
                                              "data-seed"};

bool known_key(const std::string& key) {
    return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyInfo& k) { return key == k.key; });
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

class Resolver {
public:
    Resolver(const Settings& settings, std::string command) : s_(settings), command_(std::move(command)) {}

    bool has(const std::string& key) const { return s_.count(key) > 0; }

    std::string text(const std::string& key, const std::string& def) {
        std::string v = has(key) ? s_.at(key) : def;
        record(key, v);
        return v;
    }

    double real(const std::string& key, double def) {
        double v = def;
        if (has(key) && !csv::parse_double(s_.at(key), v)) fail(key, "a finite number");
        record(key, csv::format_exact(v));
        return v;
    }

    long long integer(const std::string& key, long long def) {
        long long v = def;
        if (has(key)) {
            const std::string& raw = s_.at(key);
            auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (ec != std::errc() || p != raw.data() + raw.size()) fail(key, "an integer");
        }
        record(key, std::to_string(v));
        return v;
    }

    std::uint64_t unsigned64(const std::string& key, std::uint64_t def) {
        std::uint64_t v = def;
        if (has(key)) {
            const std::string& raw = s_.at(key);
            auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (ec != std::errc() || p != raw.data() + raw.size()) fail(key, "a non-negative integer");
        }
        record(key, std::to_string(v));
        return v;
    }

    bool flag(const std::string& key) {
        bool v = false;
        if (has(key)) {
            const std::string& raw = s_.at(key);
            if (raw == "true" || raw == "1") v = true;
            else if (raw == "false" || raw == "0") v = false;
            else fail(key, "true or false");
        }
        record(key, v ? "true" : "false");
        return v;
    }

    // Records a canonical value for a key read through consume().
    void put(const std::string& key, const std::string& value) { record(key, value); }

    // Marks a key as used without recording it in the manifest.
    std::string consume(const std::string& key, const std::string& def) {
        used_.insert(key);
        return has(key) ? s_.at(key) : def;
    }

    void finish() const {
        for (const auto& [key, value] : s_) {
            if (!used_.count(key)) throw ConfigError("--" + key + " is not used by " + command_);
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& expected) const {
        throw ConfigError("invalid value '" + s_.at(key) + "' for --" + key + ": expected " + expected);
    }

    std::vector<std::pair<std::string, std::string>> resolved;

private:
    void record(const std::string& key, const std::string& value) {
        used_.insert(key);
        resolved.emplace_back(key, value);
    }

    const Settings& s_;
    std::string command_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

PriorConfig read_prior(Resolver& r) {
    PriorConfig p;
    p.a1 = r.real("a1", p.a1);
    p.a2 = r.real("a2", p.a2);
    p.v0 = r.real("v0", p.v0);
    p.validate();
    return p;
}

McmcConfig read_mcmc(Resolver& r, const McmcConfig& def) {
    McmcConfig m;
    const auto iters = r.integer("iters", def.n_iter);
    const auto burnin = r.integer("burnin", def.burn_in);
    const auto thin = r.integer("thin", def.thin);
    require(iters > 0 && iters <= 100000000, "--iters must be in [1, 1e8]");
    require(burnin >= 0 && burnin < iters, "--burnin must be in [0, iters)");
    require(thin >= 1 && thin <= iters, "--thin must be in [1, iters]");
    m.n_iter = static_cast<int>(iters);
    m.burn_in = static_cast<int>(burnin);
    m.thin = static_cast<int>(thin);
    m.seed = r.unsigned64("seed", def.seed);
    m.validate();
    return m;
}

int read_degree(Resolver& r, int def) {
    const auto d = r.integer("degree", def);
    require(d >= 1 && d <= 200, "--degree must be in [1, 200]");
    return static_cast<int>(d);
}

std::vector<double> parse_list(const std::string& raw) {
    std::vector<double> out;
    for (const auto& cell : csv::split_line(raw)) {
        double v = 0.0;
        if (!csv::parse_double(cell, v)) throw ConfigError("invalid value '" + raw + "' for --coefficients");
        out.push_back(v);
    }
    return out;
}

std::string join_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += csv::format_exact(v[i]);
    }
    return out;
}

struct DesignDefaults {
    std::size_t n = 100;
    double noise = 0.1;
};

// Design and noise part of a synthetic spec, shared by every scenario.
void read_design(Resolver& r, SyntheticSpec& spec, const DesignDefaults& def) {
    const auto n = r.integer("n", static_cast<long long>(def.n));
    require(n >= 2 && n <= 10000000, "--n must be in [2, 1e7]");
    spec.n = static_cast<std::size_t>(n);
    spec.noise_sd = r.real("noise", def.noise);
    spec.x_min = r.real("xmin", 0.0);
    spec.x_max = r.real("xmax", 1.0);
    spec.seed = r.unsigned64("data-seed", 1);
}

SyntheticSpec read_curve(Resolver& r, const DesignDefaults& def) {
    SyntheticSpec spec;
    const std::string name = r.text("curve", "sine");
    const auto kind = parse_curve_kind(name);
    require(kind.has_value(), "unknown --curve '" + name + "' (sine, piecewise-flat, polynomial)");
    if (*kind == CurveKind::Polynomial) {
        require(r.has("coefficients"), "--curve polynomial needs --coefficients");
        auto coef = parse_list(r.consume("coefficients", ""));
        r.put("coefficients", join_list(coef));
        spec.mean = MeanFunction::polynomial(std::move(coef));
    } else {
        const double amplitude = r.real("amplitude", 1.0);
        const double frequency = r.real("frequency", 1.0);
        if (*kind == CurveKind::Sine) {
            spec.mean = MeanFunction::sine(amplitude, frequency, r.real("phase", 0.0));
        } else {
            spec.mean = MeanFunction::piecewise_flat(r.real("breakpoint", 0.5), amplitude, frequency);
            spec.mean.phase = r.real("phase", 0.0);
        }
    }
    read_design(r, spec, def);
    spec.validate();
    return spec;
}

void read_data_source(Resolver& r, RunConfig& cfg, const std::string& command) {
    if (r.has("input")) {
        for (const auto& key : kSyntheticKeys) {
            require(!r.has(key), "--input cannot be combined with synthetic data flags such as --" + key);
        }
        fs::path p = fs::absolute(r.consume("input", ""));
        r.put("input", p.lexically_normal().string());
        cfg.input = p;
    } else {
        require(r.has("curve"), command + " needs --input or a synthetic --curve");
        cfg.synthetic = read_curve(r, DesignDefaults{});
    }
}

void read_local(Resolver& r, RunConfig& cfg) {
    cfg.bandwidth = r.real("bandwidth", 1.0);
    const auto min_nb = r.integer("min-neighbors", cfg.degree + 3);
    require(min_nb >= 1 && min_nb <= 100000000, "--min-neighbors is out of range");
    cfg.min_neighbors = static_cast<int>(min_nb);
    const auto jobs = r.integer("jobs", 1);
    require(jobs >= 1 && jobs <= 1024, "--jobs must be in [1, 1024]");
    cfg.jobs = static_cast<unsigned>(jobs);
}

LocalConfig local_config(const RunConfig& cfg) {
    LocalConfig lc;
    lc.h = cfg.bandwidth;
    lc.d = cfg.degree;
    lc.prior = cfg.prior;
    lc.mcmc = cfg.mcmc;
    lc.min_neighbors = cfg.min_neighbors;
    return lc;
}

const McmcConfig kGlobalMcmc{};
const McmcConfig kLocalMcmc = McmcConfig::local_defaults();

std::optional<Command> parse_command(const std::string& s) {
    if (s == "fit-global") return Command::FitGlobal;
    if (s == "fit-local") return Command::FitLocal;
    if (s == "dof-curve") return Command::DofCurve;
    if (s == "theory-density") return Command::TheoryDensity;
    if (s == "simulate") return Command::Simulate;
    return std::nullopt;
}

std::optional<Scenario> parse_scenario(const std::string& s) {
    if (s == "curve") return Scenario::Curve;
    if (s == "sparse") return Scenario::Sparse;
    if (s == "overparam") return Scenario::Overparam;
    if (s == "null-limit") return Scenario::NullLimit;
    return std::nullopt;
}

}  // namespace

std::string command_name(Command c) {
    switch (c) {
        case Command::FitGlobal: return "fit-global";
        case Command::FitLocal: return "fit-local";
        case Command::DofCurve: return "dof-curve";
        case Command::TheoryDensity: return "theory-density";
        case Command::Simulate: return "simulate";
    }
    return "?";
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Curve: return "curve";
        case Scenario::Sparse: return "sparse";
        case Scenario::Overparam: return "overparam";
        case Scenario::NullLimit: return "null-limit";
    }
    return "?";
}

Settings parse_config_text(const std::string& text, const std::string& source) {
    Settings out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!known_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
        out[key] = value;
    }
    return out;
}

Settings read_config_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

RunConfig resolve(const Settings& settings) {
    RunConfig cfg;
    const auto it = settings.find("command");
    require(it != settings.end(), "missing command (fit-global, fit-local, dof-curve, theory-density, simulate)");
    const auto command = parse_command(it->second);
    require(command.has_value(), "unknown command '" + it->second + "'");
    cfg.command = *command;
    const std::string name = command_name(cfg.command);

    Resolver r(settings, name);
    r.text("command", name);
    cfg.out = r.consume("out", "orthosmooth-out");

    switch (cfg.command) {
        case Command::FitGlobal: {
            read_data_source(r, cfg, name);
            cfg.degree = read_degree(r, 10);
            cfg.prior = read_prior(r);
            cfg.mcmc = read_mcmc(r, kGlobalMcmc);
            if (r.has("kernel-index")) {
                const auto k = r.integer("kernel-index", 0);
                require(k >= 0, "--kernel-index must be non-negative");
                cfg.kernel_index = static_cast<long>(k);
            }
            cfg.dump_basis = r.flag("dump-basis");
            break;
        }
        case Command::FitLocal:
        case Command::DofCurve: {
            read_data_source(r, cfg, name);
            cfg.degree = read_degree(r, 3);
            read_local(r, cfg);
            cfg.prior = read_prior(r);
            cfg.mcmc = read_mcmc(r, kLocalMcmc);
            local_config(cfg).validate();
            break;
        }
        case Command::TheoryDensity: {
            cfg.prior = read_prior(r);
            cfg.w = r.real("w", 0.1);
            require(cfg.w > 0.0 && cfg.w < 1.0, "--w must lie in (0, 1)");
            const auto q = r.integer("quad-points", 256);
            require(q >= 64 && q <= 1000000, "--quad-points must be in [64, 1e6]");
            cfg.quad_points = static_cast<int>(q);
            break;
        }
        case Command::Simulate: {
            require(!r.has("input"), "simulate generates its own data; --input is not used");
            const std::string sc = r.text("scenario", "curve");
            const auto scenario = parse_scenario(sc);
            require(scenario.has_value(), "unknown --scenario '" + sc + "' (curve, sparse, overparam, null-limit)");
            cfg.scenario = *scenario;
            switch (cfg.scenario) {
                case Scenario::Curve: {
                    const std::string fit = r.text("fit", "global");
                    require(fit == "global" || fit == "local", "--fit must be global or local");
                    cfg.local = fit == "local";
                    cfg.synthetic = read_curve(r, DesignDefaults{});
                    cfg.degree = read_degree(r, cfg.local ? 3 : 10);
                    if (cfg.local) read_local(r, cfg);
                    break;
                }
                case Scenario::Overparam: {
                    cfg.synthetic = read_curve(r, DesignDefaults{200, 0.3});
                    cfg.degree = read_degree(r, 25);
                    require(cfg.degree > 10, "overparam compares d = 10 with a larger --degree");
                    break;
                }
                case Scenario::Sparse:
                case Scenario::NullLimit: {
                    SyntheticSpec spec;
                    spec.mean = MeanFunction::polynomial({0.0});
                    read_design(r, spec, DesignDefaults{400, 1.0});
                    spec.validate();
                    cfg.synthetic = spec;
                    cfg.degree = read_degree(r, 20);
                    if (cfg.scenario == Scenario::Sparse) {
                        require(cfg.degree >= 19, "sparse places signals up to column 19; --degree must be >= 19");
                        cfg.signal = r.real("signal", 5.0);
                    }
                    break;
                }
            }
            cfg.prior = read_prior(r);
            cfg.mcmc = read_mcmc(r, cfg.local ? kLocalMcmc : kGlobalMcmc);
            if (cfg.local) local_config(cfg).validate();
            break;
        }
    }
    r.finish();
    cfg.resolved = std::move(r.resolved);
    return cfg;
}

std::string manifest_text(const RunConfig& cfg) {
    std::string out = "# orthosmooth run manifest\n";
    for (const auto& [key, value] : cfg.resolved) out += key + "=" + value + "\n";
    return out;
}

namespace {

std::string file_tag(const std::string& label) {
    if (label.empty()) return "all";
    std::string tag;
    for (char c : label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        tag += ok ? c : '_';
    }
    return tag;
}

std::vector<std::pair<std::string, Dataset>> load_groups(const RunConfig& cfg) {
    Dataset data = cfg.input ? load_csv(*cfg.input) : generate(*cfg.synthetic);
    auto groups = data.split_by_group();
    std::set<std::string> tags;
    for (const auto& g : groups) {
        if (!tags.insert(file_tag(g.first)).second) {
            throw InputError("group labels collide after sanitizing for file names: '" + g.first + "'");
        }
    }
    return groups;
}

std::string v(double x) { return csv::format(x); }

double max_abs_diff(const Eigen::VectorXd& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) m = std::max(m, std::abs(a[static_cast<Eigen::Index>(i)] - b[i]));
    return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::string coefficient_table(const GlobalFit& fit, const std::optional<Eigen::VectorXd>& beta_true) {
    std::vector<std::string> header{"k", "V", "V_mcse", "beta_ols", "beta_hat"};
    if (beta_true) {
        header.push_back("beta_true");
        header.push_back("error");
    }
    csv::Table t(header);
    t.add_comment("dof_spike_slab=" + v(fit.dof) + " dof_ols=" + v(fit.ols_dof) +
                  " sigma_hat=" + v(fit.summary.sigma_hat) + " w_mean=" + v(fit.summary.w_mean));
    const auto d = fit.basis.d();
    for (Eigen::Index k = 0; k < d; ++k) {
        const bool degenerate = fit.summary.degenerate;
        std::vector<double> row{static_cast<double>(k + 1), fit.summary.V[k],
                                degenerate ? 0.0 : fit.summary.V_mcse[k],
                                degenerate ? 0.0 : fit.summary.beta_ols[k],
                                degenerate ? 0.0 : fit.summary.beta_hat[k]};
        if (beta_true) {
            row.push_back((*beta_true)[k]);
            row.push_back(row[4] - (*beta_true)[k]);
        }
        t.add_row(row);
    }
    return t.str();
}

void fit_global_outputs(const RunConfig& cfg, std::vector<OutputFile>& files) {
    for (const auto& [label, data] : load_groups(cfg)) {
        const std::string stem = "fit-global_" + file_tag(label);
        const GlobalFit fit = fit_global(data, cfg.degree, cfg.prior, cfg.mcmc);
        const auto n = static_cast<Eigen::Index>(data.size());

        csv::Table curve({"x", "y", "fitted_spike_slab", "fitted_ols"});
        if (!label.empty()) curve.add_comment("group=" + label);
        curve.add_comment("dof_spike_slab=" + v(fit.dof) + " dof_ols=" + v(fit.ols_dof));
        for (Eigen::Index i = 0; i < n; ++i) curve.add_row({fit.x[i], fit.y[i], fit.fitted[i], fit.ols_fitted[i]});
        files.push_back({stem + ".csv", curve.str()});
        files.push_back({stem + "_coefficients.csv", coefficient_table(fit, std::nullopt)});

        const Eigen::VectorXd ds = effective_kernel_diagonal(fit, SmootherKind::SpikeSlab);
        const Eigen::VectorXd dols = effective_kernel_diagonal(fit, SmootherKind::Ols);
        csv::Table diag({"x", "self_weight_spike_slab", "self_weight_ols"});
        for (Eigen::Index i = 0; i < n; ++i) diag.add_row({fit.x[i], ds[i], dols[i]});
        files.push_back({stem + "_kernel_diagonal.csv", diag.str()});

        if (cfg.kernel_index) {
            const auto ks = effective_kernel(fit, *cfg.kernel_index, SmootherKind::SpikeSlab);
            const auto ko = effective_kernel(fit, *cfg.kernel_index, SmootherKind::Ols);
            csv::Table kern({"x_j", "weight_spike_slab", "weight_ols"});
            kern.add_comment("target_index=" + std::to_string(*cfg.kernel_index) + " x=" + v(fit.x[*cfg.kernel_index]));
            for (Eigen::Index j = 0; j < n; ++j) kern.add_row({fit.x[j], ks.weights[j], ko.weights[j]});
            files.push_back({stem + "_kernel.csv", kern.str()});
        }
        if (cfg.dump_basis) {
            std::vector<std::string> header{"x"};
            for (int k = 1; k <= cfg.degree; ++k) header.push_back("b" + std::to_string(k));
            csv::Table basis(header);
            for (Eigen::Index i = 0; i < n; ++i) {
                std::vector<double> row{fit.x[i]};
                for (Eigen::Index k = 0; k < fit.basis.d(); ++k) row.push_back(fit.basis.values()(i, k));
                basis.add_row(row);
            }
            files.push_back({stem + "_basis.csv", basis.str()});
        }
    }
}

void add_failure_comments(csv::Table& t, const CurveFit& curve) {
    for (const auto& f : curve.failures) t.add_comment("failed point " + std::to_string(f.i) + ": " + one_line(f.message));
}

void fit_local_outputs(const RunConfig& cfg, std::vector<OutputFile>& files, bool dof_only) {
    const LocalConfig lc = local_config(cfg);
    const std::string cmd = command_name(cfg.command);
    for (const auto& [label, data] : load_groups(cfg)) {
        const std::string stem = cmd + "_" + file_tag(label);
        const CurveFit curve = fit_curve(data, lc, cfg.jobs);

        csv::Table dof({"x", "dof"});
        if (!label.empty()) dof.add_comment("group=" + label);
        add_failure_comments(dof, curve);
        for (std::size_t i = 0; i < data.size(); ++i) dof.add_row({curve.dof_curve.x[i], curve.dof_curve.dof[i]});
        if (dof_only) {
            files.push_back({stem + ".csv", dof.str()});
            continue;
        }

        csv::Table fitted({"x", "y", "f_hat", "dof"});
        if (!label.empty()) fitted.add_comment("group=" + label);
        add_failure_comments(fitted, curve);
        for (std::size_t i = 0; i < data.size(); ++i) {
            fitted.add_row({data[i].x, data[i].y, curve.fitted[i], curve.dof_curve.dof[i]});
        }
        files.push_back({stem + ".csv", fitted.str()});
        files.push_back({stem + "_dof.csv", dof.str()});

        std::vector<std::string> header{"x", "n_i", "sigma_i", "dof", "widened", "degenerate"};
        for (int k = 1; k <= cfg.degree; ++k) header.push_back("V_" + std::to_string(k));
        csv::Table diag(header);
        add_failure_comments(diag, curve);
        for (std::size_t i = 0; i < data.size(); ++i) {
            const LocalFit& f = curve.fits[i];
            std::vector<std::string> row{v(data[i].x), std::to_string(f.n_i), v(f.sigma_i), v(f.dof_i),
                                         f.widened ? "1" : "0", f.degenerate ? "1" : "0"};
            for (int k = 0; k < cfg.degree; ++k) {
                row.push_back(k < f.V.size() ? v(f.V[k]) : v(std::nan("")));
            }
            diag.add_row(row);
        }
        files.push_back({stem + "_diagnostics.csv", diag.str()});
    }
}

void theory_outputs(const RunConfig& cfg, std::vector<OutputFile>& files) {
    const auto u_grid = theory::log_grid(1e-4, 1e3, 701);
    files.push_back({"theory-density_prior.csv", theory::to_csv({theory::prior_density(cfg.w, cfg.prior, u_grid)})});

    const auto nu_grid = theory::open_grid(0.0, 1.0, 999);
    std::vector<theory::DensityCurve> limits;
    csv::Table means({"z_sq", "limiting_mean"});
    means.add_comment("w=" + v(cfg.w));
    for (double z_sq : theory::chi_sq1_percentiles()) {
        const theory::NullLimitInput in{cfg.w, z_sq, cfg.prior};
        limits.push_back(theory::limiting_null_density(in, nu_grid));
        means.add_row({z_sq, theory::limiting_null_mean(in, cfg.quad_points)});
    }
    files.push_back({"theory-density_limiting.csv", theory::to_csv(limits)});
    files.push_back({"theory-density_mean.csv", means.str()});
}

Dataset with_y(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < x.size(); ++i) pts.push_back({x[i], y[i]});
    return Dataset(std::move(pts));
}

// True coefficients of the centered truth in the fitted basis.
Eigen::VectorXd project_truth(const OrthoBasis& basis, const std::vector<double>& f) {
    Eigen::VectorXd fv = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
    fv.array() -= fv.mean();
    return basis.project(fv);
}

void simulate_outputs(const RunConfig& cfg, std::vector<OutputFile>& files) {
    const SyntheticSpec& spec = *cfg.synthetic;
    const std::string stem = "simulate_" + scenario_name(cfg.scenario);
    Dataset noisy = generate(spec);
    std::vector<double> x = noisy.xs();
    std::vector<double> f = truth(spec);

    if (cfg.scenario == Scenario::Sparse) {
        const OrthoBasis basis = build_global(x, cfg.degree);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(cfg.degree);
        for (int k : {0, 3, 7, 12, 18}) beta[k] = cfg.signal * spec.noise_sd;
        const Eigen::VectorXd signal = basis.values() * beta;
        std::vector<double> y = noisy.ys();
        for (std::size_t i = 0; i < y.size(); ++i) {
            f[i] = signal[static_cast<Eigen::Index>(i)];
            y[i] += f[i];
        }
        noisy = with_y(x, y);
    }

    if (cfg.local) {
        const CurveFit curve = fit_curve(noisy, local_config(cfg), cfg.jobs);
        csv::Table fit({"x", "truth", "y", "f_hat", "dof"});
        add_failure_comments(fit, curve);
        for (std::size_t i = 0; i < x.size(); ++i) fit.add_row({x[i], f[i], noisy[i].y, curve.fitted[i], curve.dof_curve.dof[i]});
        files.push_back({stem + "_fit.csv", fit.str()});
        double dof_sum = 0.0;
        for (double d : curve.dof_curve.dof) dof_sum += d;
        csv::Table summary({"metric", "value"});
        summary.add_row(std::vector<std::string>{"max_abs_error", v(max_abs_diff(curve.fitted, f))});
        summary.add_row(std::vector<std::string>{"mean_dof", v(dof_sum / static_cast<double>(x.size()))});
        summary.add_row(std::vector<std::string>{"failed_points", std::to_string(curve.failures.size())});
        files.push_back({stem + "_summary.csv", summary.str()});
        return;
    }

    if (cfg.scenario == Scenario::Overparam) {
        const GlobalFit small = fit_global(noisy, 10, cfg.prior, cfg.mcmc);
        const GlobalFit large = fit_global(noisy, cfg.degree, cfg.prior, cfg.mcmc);
        const std::string dl = std::to_string(cfg.degree);
        csv::Table fit({"x", "truth", "y", "fitted_spike_slab_d10", "fitted_ols_d10", "fitted_spike_slab_d" + dl,
                        "fitted_ols_d" + dl});
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            fit.add_row({x[i], f[i], noisy[i].y, small.fitted[ii], small.ols_fitted[ii], large.fitted[ii], large.ols_fitted[ii]});
        }
        files.push_back({stem + "_fit.csv", fit.str()});
        csv::Table summary({"degree", "dof_spike_slab", "max_abs_error_spike_slab", "max_abs_error_ols"});
        for (const GlobalFit* g : {&small, &large}) {
            summary.add_row({static_cast<double>(g->basis.d()), g->dof, max_abs_diff(g->fitted, f), max_abs_diff(g->ols_fitted, f)});
        }
        files.push_back({stem + "_summary.csv", summary.str()});
        return;
    }

    const GlobalFit fit = fit_global(noisy, cfg.degree, cfg.prior, cfg.mcmc);
    csv::Table curve({"x", "truth", "y", "fitted_spike_slab", "fitted_ols"});
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        curve.add_row({x[i], f[i], noisy[i].y, fit.fitted[ii], fit.ols_fitted[ii]});
    }
    files.push_back({stem + "_fit.csv", curve.str()});

    if (cfg.scenario == Scenario::NullLimit) {
        csv::Table summary({"k", "z_sq", "V", "V_mcse", "limiting_mean"});
        summary.add_comment("w_mean=" + v(fit.summary.w_mean));
        for (Eigen::Index k = 0; k < fit.basis.d(); ++k) {
            const double z_sq = fit.summary.z[k] * fit.summary.z[k];
            const double limit = theory::limiting_null_mean({fit.summary.w_mean, z_sq, cfg.prior});
            summary.add_row({static_cast<double>(k + 1), z_sq, fit.summary.V[k], fit.summary.V_mcse[k], limit});
        }
        files.push_back({stem + "_summary.csv", summary.str()});
        return;
    }

    std::string table = coefficient_table(fit, project_truth(fit.basis, f));
    table = "# max_abs_error_spike_slab=" + v(max_abs_diff(fit.fitted, f)) +
            " max_abs_error_ols=" + v(max_abs_diff(fit.ols_fitted, f)) + "\n" + table;
    files.push_back({stem + "_summary.csv", table});
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 2;
        case ErrorKind::Data: return 3;
        case ErrorKind::Numerical: return 4;
    }
    return 4;
}

}  // namespace

std::vector<OutputFile> execute(const RunConfig& cfg) {
    std::vector<OutputFile> files;
    switch (cfg.command) {
        case Command::FitGlobal: fit_global_outputs(cfg, files); break;
        case Command::FitLocal: fit_local_outputs(cfg, files, false); break;
        case Command::DofCurve: fit_local_outputs(cfg, files, true); break;
        case Command::TheoryDensity: theory_outputs(cfg, files); break;
        case Command::Simulate: simulate_outputs(cfg, files); break;
    }
    return files;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spike-and-slab orthogonal polynomial smoothing", "orthosmooth"};
    std::string positional, config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    app.add_option("cmd", positional, "command (same as --command)");
    app.add_option("--config", config_path, "key=value file; flags override it");
    for (const auto& k : kKeys) {
        const std::string key = k.key;
        if (key == "dump-basis") continue;
        options[key] = app.add_option("--" + key, values[key], k.help);
    }
    bool dump_basis = false;
    options["dump-basis"] = app.add_flag("--dump-basis", dump_basis, "fit-global: also write the basis columns");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "orthosmooth: usage error: " << one_line(e.what()) << "\n";
        return 2;
    }

    try {
        Settings settings;
        if (!config_path.empty()) settings = read_config_file(config_path);
        for (const auto& [key, opt] : options) {
            if (opt->count() == 0) continue;
            settings[key] = key == "dump-basis" ? (dump_basis ? "true" : "false") : values[key];
        }
        if (!positional.empty()) {
            if (options["command"]->count() && values["command"] != positional) {
                throw ConfigError("command given twice: '" + positional + "' and '" + values["command"] + "'");
            }
            settings["command"] = positional;
        }

        const RunConfig cfg = resolve(settings);
        const std::vector<OutputFile> files = execute(cfg);

        std::error_code ec;
        fs::create_directories(cfg.out, ec);
        if (ec) throw InputError("cannot create output directory '" + cfg.out.string() + "': " + ec.message());
        for (const auto& f : files) {
            csv::write_atomic(cfg.out / f.name, f.content);
            out << "wrote " << (cfg.out / f.name).string() << "\n";
        }
        const fs::path manifest = cfg.out / (command_name(cfg.command) + "_manifest.txt");
        csv::write_atomic(manifest, manifest_text(cfg));
        out << "wrote " << manifest.string() << "\n";
        return 0;
    } catch (const Error& e) {
        const char* label = e.kind() == ErrorKind::Usage ? "usage error" : e.kind() == ErrorKind::Data ? "data error" : "numerical error";
        err << "orthosmooth: " << label << ": " << one_line(e.what()) << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "orthosmooth: data error: " << one_line(e.what()) << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "orthosmooth: numerical error: " << one_line(e.what()) << "\n";
        return 4;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace orthosmooth::cli
