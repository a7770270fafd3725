// dsc_cli.cpp - command-line front end for the deep-strong-coupling toolkit
//
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure,
// 1 when `reproduce` finishes with failing criteria.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dsc/acceptance.hpp"
#include "dsc/circuit.hpp"
#include "dsc/entanglement.hpp"
#include "dsc/io.hpp"
#include "dsc/presets.hpp"
#include "dsc/specfit.hpp"
#include "dsc/spectrum.hpp"
#include "dsc/states.hpp"
#include "dsc/wigner.hpp"

namespace {

using dsc::RabiParams;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string preset;
    std::string config;
    std::string out;
    std::uint64_t seed = 1;
    int n_max = 0;
    double tol = 1e-9;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--preset", c.preset, "Parameter preset")
        ->check(CLI::IsMember({"I_m0p5", "I_m1p5", "I_2p5", "II_m0p5", "III_0p5"}));
    sub->add_option("--config", c.config, "JSON file with delta_ghz, omega_o_ghz, g_ghz overrides");
    sub->add_option("--out", c.out, "Output path (default: stdout)");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--n-max", c.n_max, "Fixed Fock truncation (default: adaptive)")->check(CLI::NonNegativeNumber);
    sub->add_option("--tol", c.tol, "Relative tolerance of the adaptive truncation")->check(CLI::PositiveNumber);
}

// Preset first, then any keys present in the config file.
std::optional<RabiParams> resolve_params(const Common& c) {
    std::optional<RabiParams> p;
    if (!c.preset.empty()) p = dsc::preset(c.preset).params;
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        if (!in) throw UsageError("cannot open config file " + c.config);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("config file " + c.config + ": " + e.what());
        }
        if (!j.is_object()) throw UsageError("config file " + c.config + " must hold a JSON object");
        RabiParams q = p.value_or(RabiParams{});
        auto take = [&](const char* key, double& field) {
            if (!j.contains(key)) return;
            if (!j[key].is_number()) throw UsageError(std::string("config key ") + key + " must be a number");
            field = j[key].get<double>();
        };
        take("delta_ghz", q.delta);
        take("omega_o_ghz", q.omega_o);
        take("g_ghz", q.g);
        take("epsilon_ghz", q.epsilon);
        p = q;
    }
    if (p) {
        try {
            p->validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return p;
}

RabiParams require_params(const Common& c) {
    const auto p = resolve_params(c);
    if (!p) throw UsageError("one of --preset or --config is required");
    return *p;
}

dsc::TruncationOptions truncation(const Common& c) {
    dsc::TruncationOptions t;
    t.rel_tol = c.tol;
    return t;
}

dsc::EigenSystem eigensystem(const RabiParams& p, int k, const Common& c) {
    if (c.n_max > 0) {
        if (2 * c.n_max < k) throw UsageError("--n-max too small for the requested levels");
        return dsc::solve(p, dsc::FockSpace(c.n_max), k);
    }
    dsc::EigenSystem es = dsc::adaptive_truncation(p, k, truncation(c));
    if (!es.converged) throw dsc::NumericalError("truncation did not converge within n_max = 2000");
    return es;
}

void write_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
    if (path.empty() || path == "-") {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    body(out);
    if (!out) throw UsageError("write failed for " + path);
}

std::vector<dsc::LevelPair> parse_pairs(const std::string& text) {
    std::vector<dsc::LevelPair> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) throw UsageError("pair '" + item + "' must look like i-j");
        try {
            std::size_t used = 0;
            const int i = std::stoi(item.substr(0, dash), &used);
            const int j = std::stoi(item.substr(dash + 1));
            if (i < 0 || j <= i) throw UsageError("pair '" + item + "' needs 0 <= i < j");
            out.emplace_back(i, j);
        } catch (const std::logic_error&) {
            throw UsageError("pair '" + item + "' is not numeric");
        }
    }
    if (out.empty()) throw UsageError("no transition pairs given");
    return out;
}

std::vector<double> bias_axis(double lo, double hi, int steps) {
    if (steps < 1) throw UsageError("--steps must be >= 1");
    if (hi < lo) throw UsageError("empty bias range: --eps-max < --eps-min");
    if (hi == lo && steps > 1) throw UsageError("empty bias range: --eps-min equals --eps-max with several steps");
    return dsc::linspace(lo, hi, steps);
}

std::vector<dsc::LevelPair> pairs_for_levels(int levels) {
    if (levels == 0) return dsc::default_transition_pairs();
    if (levels < 2) throw UsageError("--levels must be 0 or >= 2");
    return dsc::all_pairs(levels);
}

// spectrum -------------------------------------------------------------------

struct SpectrumArgs {
    double eps_min = -8.0, eps_max = 8.0;
    int steps = 161;
    std::string pairs = "0-1,0-2,1-3,2-4";
};

int run_spectrum(const Common& c, const SpectrumArgs& a) {
    const RabiParams p = require_params(c);
    const auto eps = bias_axis(a.eps_min, a.eps_max, a.steps);
    const auto pairs = parse_pairs(a.pairs);
    dsc::SweepOptions so;
    so.truncation = truncation(c);
    so.fixed_n_max = c.n_max;
    const dsc::BiasSweep sweep = dsc::bias_sweep(p, eps, pairs, so);
    if (!sweep.converged) throw dsc::NumericalError("truncation did not converge on the sweep");
    write_output(c.out, [&](std::ostream& os) { dsc::io::write_sweep_csv(os, sweep); });
    return 0;
}

// entanglement ---------------------------------------------------------------

int run_entanglement(const Common& c, double temperature_mk) {
    if (!(temperature_mk > 0.0)) throw UsageError("--temperature-mk must be > 0");
    std::vector<std::pair<std::string, RabiParams>> targets;
    const auto p = resolve_params(c);
    if (p) {
        targets.emplace_back(c.preset.empty() ? "custom" : c.preset, *p);
    } else {
        for (const auto& pr : dsc::presets) targets.emplace_back(std::string(pr.id), pr.params);
    }
    std::vector<dsc::io::EntanglementRow> rows;
    for (const auto& [name, params] : targets) {
        const dsc::EigenSystem es = eigensystem(params, 2, c);
        const dsc::ThermalSpec t{temperature_mk};
        const dsc::DensityMatrix rho = dsc::thermal_state(params, t, dsc::FockSpace(es.n_max_used));
        dsc::io::EntanglementRow r;
        r.preset = name;
        r.alpha = params.alpha();
        r.e_gs_exact = dsc::vn_entanglement(es.states[0]);
        r.e_gs_formula = dsc::vn_entanglement_approx(r.alpha, dsc::EntropyApprox::exact_formula).value;
        r.e_gs_second_order = dsc::vn_entanglement_approx(r.alpha, dsc::EntropyApprox::second_order).value;
        r.temperature_mk = temperature_mk;
        r.e_te_exact = dsc::negativity_entanglement(rho);
        r.e_te_estimate = dsc::thermal_entanglement_estimate(params, t).value;
        rows.push_back(r);
    }
    write_output(c.out, [&](std::ostream& os) { dsc::io::write_entanglement_csv(os, rows); });
    return 0;
}

// wigner ---------------------------------------------------------------------

struct WignerArgs {
    int state = 0;
    double extent = 4.0;
    int points = 101;
    double epsilon = 0.0;
};

int run_wigner(const Common& c, const WignerArgs& a) {
    if (a.state < 0) throw UsageError("--state must be >= 0");
    if (!(a.extent > 0.0) || a.points < 2) throw UsageError("grid needs --extent > 0 and --points >= 2");
    const RabiParams p = require_params(c).with_epsilon(a.epsilon);
    const dsc::EigenSystem es = eigensystem(p, a.state + 1, c);
    dsc::WignerGridSpec spec;
    spec.re_min = spec.im_min = -a.extent;
    spec.re_max = spec.im_max = a.extent;
    spec.re_points = spec.im_points = a.points;
    const dsc::WignerGrid grid = dsc::wigner(dsc::reduce_to_oscillator(es.states[a.state]), spec);
    write_output(c.out, [&](std::ostream& os) { dsc::io::write_wigner_csv(os, grid); });
    return 0;
}

// coupler --------------------------------------------------------------------

struct CouplerArgs {
    std::string circuit;
    double flux_min = 0.46, flux_max = 0.54;
    int flux_steps = 17;
    double delta_i = 10.0;
};

dsc::circuit::CouplerCircuit load_circuit(const std::string& path) {
    dsc::circuit::CouplerCircuit c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open circuit file " + path);
    nlohmann::json j;
    try {
        in >> j;
        if (j.contains("i_c_na")) c.i_c = j.at("i_c_na").get<double>();
        if (j.contains("a3")) c.a3 = j.at("a3").get<double>();
        if (j.contains("area_ratio")) c.area_ratio = j.at("area_ratio").get<double>();
        if (j.contains("l0_ph")) c.l0 = j.at("l0_ph").get<double>();
        if (j.contains("cap_ff")) c.cap = j.at("cap_ff").get<double>();
        if (j.contains("kind")) {
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "four_junction") c.kind = dsc::circuit::CouplerKind::four_junction;
            else if (kind == "squid") c.kind = dsc::circuit::CouplerKind::squid;
            else throw UsageError("circuit kind must be four_junction or squid");
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("circuit file " + path + ": " + e.what());
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

int run_coupler(const Common& c, const CouplerArgs& a) {
    const auto circuit = load_circuit(a.circuit);
    if (a.flux_steps < 1 || a.flux_max < a.flux_min) throw UsageError("empty flux range");
    if (!(a.delta_i > 0.0)) throw UsageError("--delta-i must be > 0");
    const auto pts = dsc::circuit::coupler_sweep(circuit, dsc::linspace(a.flux_min, a.flux_max, a.flux_steps), a.delta_i);
    write_output(c.out, [&](std::ostream& os) { dsc::io::write_coupler_csv(os, pts); });
    return 0;
}

// synthesize -----------------------------------------------------------------

struct SynthesizeArgs {
    double eps_min = -8.0, eps_max = 8.0;
    int steps = 41;
    double probe_min = 0.5, probe_max = 12.0, probe_step = 0.0;
    double linewidth = 0.002;
    double noise = 0.01;
    double temperature_mk = 45.0;
    int levels = 6;
};

int run_synthesize(const Common& c, const SynthesizeArgs& a) {
    const RabiParams p = require_params(c);
    const auto eps = bias_axis(a.eps_min, a.eps_max, a.steps);
    if (!(a.linewidth > 0.0)) throw UsageError("--linewidth must be > 0");
    if (a.noise < 0.0) throw UsageError("--noise must be >= 0");
    if (!(a.probe_max > a.probe_min)) throw UsageError("empty probe range");
    const double step = a.probe_step > 0.0 ? a.probe_step : a.linewidth / 5.0;
    const int n_probe = static_cast<int>(std::round((a.probe_max - a.probe_min) / step)) + 1;
    dsc::SynthesisOptions so;
    so.temperature = {a.temperature_mk};
    so.linewidth = a.linewidth;
    so.noise_sigma = a.noise;
    so.seed = c.seed;
    so.pairs = pairs_for_levels(a.levels);
    so.n_max = c.n_max;
    dsc::SpectroscopyDataset ds = dsc::synthesize_dataset(p, eps, dsc::linspace(a.probe_min, a.probe_max, n_probe), so);
    ds.circuit_id = c.preset;
    write_output(c.out, [&](std::ostream& os) { dsc::io::write_dataset_csv(os, ds); });
    return 0;
}

// fit ------------------------------------------------------------------------

struct FitArgs {
    std::string data;
    std::string assignments;
    double linewidth = 0.002;
    double prominence = 0.05;
    int levels = 6;
    double delta = 0.0, omega_o = 0.0, g = 0.0;
};

int run_fit(const Common& c, const FitArgs& a) {
    RabiParams init = resolve_params(c).value_or(RabiParams{});
    if (a.delta > 0.0) init.delta = a.delta;
    if (a.omega_o > 0.0) init.omega_o = a.omega_o;
    if (a.g > 0.0) init.g = a.g;
    if (!(init.delta > 0.0 && init.omega_o > 0.0 && init.g > 0.0)) {
        throw UsageError("an initial guess is required: --preset, --config or --delta/--omega-o/--g");
    }
    if (!(a.linewidth > 0.0)) throw UsageError("--linewidth must be > 0");
    dsc::SpectroscopyDataset ds;
    try {
        ds = dsc::io::read_dataset_csv(a.data);
    } catch (const dsc::io::ParseError& e) {
        throw UsageError(a.data + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
    dsc::ExtractionOptions eo;
    eo.prominence = a.prominence;
    const dsc::DipSet dips = dsc::extract_dips(ds, eo);
    dsc::FitOptions fo;
    fo.linewidth = a.linewidth;
    fo.transitions = pairs_for_levels(a.levels);
    fo.n_max = c.n_max;
    const dsc::FitResult fit = dsc::fit_parameters(dips, init, fo);
    write_output(c.out, [&](std::ostream& os) { dsc::io::write_fit_result(os, fit); });
    if (!a.assignments.empty())
        write_output(a.assignments, [&](std::ostream& os) { dsc::io::write_dip_assignments_csv(os, dips, fit); });
    if (!fit.converged) {
        std::cerr << "numerical failure: fit did not converge\n";
        return 3;
    }
    return 0;
}

// reproduce ------------------------------------------------------------------

std::set<int> parse_ids(const std::string& text) {
    std::set<int> ids;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            const int id = std::stoi(item);
            if (id < 1 || id > 13) throw UsageError("criterion id " + item + " outside 1..13");
            ids.insert(id);
        } catch (const std::logic_error&) {
            throw UsageError("criterion id '" + item + "' is not numeric");
        }
    }
    return ids;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

int run_reproduce(const Common& c, const std::string& only) {
    const std::filesystem::path dir = c.out.empty() ? std::filesystem::path("reproduction") : std::filesystem::path(c.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create " + dir.string() + ": " + ec.message());
    const std::set<int> ids = only.empty() ? std::set<int>{} : parse_ids(only);
    const auto all = dsc::acceptance::criteria();
    std::vector<dsc::acceptance::CriterionResult> results;
    for (std::size_t k = 0; k < all.size(); ++k) {
        if (!ids.empty() && !ids.count(static_cast<int>(k) + 1)) continue;
        results.push_back(all[k]({}));
        std::cout << dsc::acceptance::status_line(results.back()) << std::endl;
    }
    const std::filesystem::path report = dir / "report.tsv";
    write_output(report.string(), [&](std::ostream& os) { dsc::acceptance::write_report(os, results, utc_timestamp()); });
    std::cout << "report written to " << report.string() << std::endl;
    const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed(); });
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flux-qubit / LC-oscillator deep-strong-coupling toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    Common common;
    int rc = 0;

    SpectrumArgs spectrum;
    auto* sp = app.add_subcommand("spectrum", "Transition frequencies and matrix elements over a bias sweep");
    add_common(sp, common);
    sp->add_option("--eps-min", spectrum.eps_min, "Lowest bias (GHz)");
    sp->add_option("--eps-max", spectrum.eps_max, "Highest bias (GHz)");
    sp->add_option("--steps", spectrum.steps, "Number of bias points");
    sp->add_option("--pairs", spectrum.pairs, "Transitions as i-j,i-j,...");
    sp->callback([&] { rc = run_spectrum(common, spectrum); });

    double temperature_mk = 45.0;
    auto* en = app.add_subcommand("entanglement", "Ground-state and thermal entanglement (all presets by default)");
    add_common(en, common);
    en->add_option("--temperature-mk", temperature_mk, "Temperature (mK)");
    en->callback([&] { rc = run_entanglement(common, temperature_mk); });

    WignerArgs wig;
    auto* wi = app.add_subcommand("wigner", "Wigner function of the oscillator in one eigenstate");
    add_common(wi, common);
    wi->add_option("--state", wig.state, "Energy level");
    wi->add_option("--extent", wig.extent, "Grid half-width in Re and Im alpha");
    wi->add_option("--points", wig.points, "Grid points per axis");
    wi->add_option("--epsilon", wig.epsilon, "Flux bias (GHz)");
    wi->callback([&] { rc = run_wigner(common, wig); });

    CouplerArgs cpl;
    auto* co = app.add_subcommand("coupler", "Coupler phases and inductances over a flux sweep");
    add_common(co, common);
    co->add_option("--circuit", cpl.circuit, "JSON file: i_c_na, a3, kind, area_ratio");
    co->add_option("--flux-min", cpl.flux_min, "Lowest n_phi_q");
    co->add_option("--flux-max", cpl.flux_max, "Highest n_phi_q");
    co->add_option("--flux-steps", cpl.flux_steps, "Number of flux points");
    co->add_option("--delta-i", cpl.delta_i, "Bias-current step for M (nA)");
    co->callback([&] { rc = run_coupler(common, cpl); });

    SynthesizeArgs syn;
    auto* sy = app.add_subcommand("synthesize", "Synthetic |S21| spectroscopy dataset");
    add_common(sy, common);
    sy->add_option("--eps-min", syn.eps_min, "Lowest bias (GHz)");
    sy->add_option("--eps-max", syn.eps_max, "Highest bias (GHz)");
    sy->add_option("--steps", syn.steps, "Number of bias points");
    sy->add_option("--probe-min", syn.probe_min, "Lowest probe frequency (GHz)");
    sy->add_option("--probe-max", syn.probe_max, "Highest probe frequency (GHz)");
    sy->add_option("--probe-step", syn.probe_step, "Probe spacing (GHz, default linewidth/5)");
    sy->add_option("--linewidth", syn.linewidth, "Dip FWHM (GHz)");
    sy->add_option("--noise", syn.noise, "Gaussian noise sigma");
    sy->add_option("--temperature-mk", syn.temperature_mk, "Temperature for level populations (mK)");
    sy->add_option("--levels", syn.levels, "Lines between all pairs of this many levels; 0 = plotted set");
    sy->callback([&] { rc = run_synthesize(common, syn); });

    FitArgs fit;
    auto* fi = app.add_subcommand("fit", "Fit delta, omega_o and g to a spectroscopy dataset");
    add_common(fi, common);
    fi->add_option("--data", fit.data, "Dataset CSV (epsilon_ghz,probe_ghz,s21)")->required();
    fi->add_option("--assignments", fit.assignments, "Also write the dip assignments CSV here");
    fi->add_option("--linewidth", fit.linewidth, "Expected dip FWHM (GHz)");
    fi->add_option("--prominence", fit.prominence, "Minimum dip depth");
    fi->add_option("--levels", fit.levels, "Considered transitions: all pairs of this many levels; 0 = plotted set");
    fi->add_option("--delta", fit.delta, "Initial delta (GHz)");
    fi->add_option("--omega-o", fit.omega_o, "Initial omega_o (GHz)");
    fi->add_option("--g", fit.g, "Initial g (GHz)");
    fi->callback([&] { rc = run_fit(common, fit); });

    std::string only;
    auto* re = app.add_subcommand("reproduce", "Run the acceptance criteria and write a report into --out");
    add_common(re, common);
    re->add_option("--only", only, "Comma-separated criterion ids");
    re->callback([&] { rc = run_reproduce(common, only); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const dsc::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return rc;
}
