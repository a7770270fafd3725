// specfit.hpp - transmission-spectroscopy data model and parameter fitting
//
// Pipeline: synthesize_dataset (forward model) -> extract_dips (Lorentzian
// dip finding per flux-bias column) -> fit_parameters (least squares of the
// dip centres against diagonalized transition frequencies).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsc/detail/levenberg_marquardt.hpp"
#include "dsc/detail/parallel.hpp"
#include "dsc/diagnostics.hpp"
#include "dsc/entanglement.hpp"
#include "dsc/rabi.hpp"
#include "dsc/spectrum.hpp"
#include "dsc/units.hpp"

namespace dsc {

struct SpectroscopyDataset {
    std::vector<double> epsilons;    // GHz
    std::vector<double> probe_freqs; // GHz, ascending
    Eigen::MatrixXd s21_mag;         // (probe index, epsilon index), column max = 1
    std::string circuit_id;
    double n_phi_q = 0.0;

    void normalize_columns() {
        for (Eigen::Index c = 0; c < s21_mag.cols(); ++c) {
            const double m = s21_mag.col(c).maxCoeff();
            if (m > 0.0) s21_mag.col(c) /= m;
        }
    }
};

struct Dip {
    double center = 0.0; // GHz
    double fwhm = 0.0;   // GHz
    double depth = 0.0;  // relative, (0, 1]
};

struct DipSet {
    std::vector<double> epsilons;
    std::vector<std::vector<Dip>> dips; // dips[k] belongs to epsilons[k]

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& d : dips) n += d.size();
        return n;
    }
};

// Lorentzian dip profile, 1 at the far wings and 1 - depth at the centre.
inline double lorentzian_dip(double omega, double center, double fwhm, double depth) {
    const double hw = 0.5 * fwhm;
    const double d = omega - center;
    return 1.0 - depth * hw * hw / (d * d + hw * hw);
}

// Every (i, j), i < j < levels.
inline std::vector<LevelPair> all_pairs(int levels) {
    std::vector<LevelPair> out;
    for (int i = 0; i < levels; ++i)
        for (int j = i + 1; j < levels; ++j) out.emplace_back(i, j);
    return out;
}

struct SynthesisOptions {
    ThermalSpec temperature{45.0};
    double linewidth = 0.03;   // FWHM, GHz
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;
    double depth_scale = 0.5;  // depth of the strongest in-window line in each column
    std::vector<LevelPair> pairs = all_pairs(6);
    int extra_levels = 4;      // levels beyond the highest paired one for populations
    int n_max = 0;             // 0 = adaptive
    std::size_t workers = 0;
};

// Unit baseline with a Lorentzian dip at every allowed transition, depth
// proportional to p_i |T_ij|^2, plus Gaussian noise; columns renormalized to
// max 1. Deterministic for a given seed.
inline SpectroscopyDataset synthesize_dataset(const RabiParams& tmpl, const std::vector<double>& epsilons,
                                              const std::vector<double>& probe_freqs,
                                              const SynthesisOptions& opt = {}) {
    tmpl.validate();
    if (!(opt.linewidth > 0.0)) throw std::invalid_argument("synthesize_dataset: linewidth must be > 0");
    if (opt.noise_sigma < 0.0) throw std::invalid_argument("synthesize_dataset: noise_sigma must be >= 0");
    if (!std::is_sorted(probe_freqs.begin(), probe_freqs.end())) {
        throw std::invalid_argument("synthesize_dataset: probe frequencies must be ascending");
    }
    if (probe_freqs.empty() || epsilons.empty()) {
        throw std::invalid_argument("synthesize_dataset: empty probe or bias axis");
    }
    const int k = levels_needed(opt.pairs) + opt.extra_levels;
    int n_max = opt.n_max;
    if (n_max <= 0) {
        double eps_max = 0.0;
        for (double e : epsilons) eps_max = std::max(eps_max, std::abs(e));
        n_max = adaptive_truncation(tmpl.with_epsilon(eps_max), k).n_max_used;
    }
    const FockSpace space(n_max);
    const double kt = opt.temperature.kt_ghz();

    struct Line {
        double omega;
        double strength;
    };
    std::vector<std::vector<Line>> lines(epsilons.size());
    detail::parallel_for(epsilons.size(), [&](std::size_t c) {
        const EigenSystem es = solve(tmpl.with_epsilon(epsilons[c]), space, k);
        Eigen::VectorXd pop(k);
        for (int i = 0; i < k; ++i) pop(i) = std::exp(-(es.energies(i) - es.energies(0)) / kt);
        pop /= pop.sum();
        for (const Transition& t : transition_table(es, opt.pairs).entries) {
            if (!t.allowed || t.omega <= 0.0) continue;
            lines[c].push_back({t.omega, pop(t.i) * std::norm(t.t)});
        }
    }, opt.workers);

    SpectroscopyDataset ds;
    ds.epsilons = epsilons;
    ds.probe_freqs = probe_freqs;
    ds.s21_mag = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(probe_freqs.size()),
                                       static_cast<Eigen::Index>(epsilons.size()));
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t c = 0; c < epsilons.size(); ++c) {
        double strongest = 0.0;
        for (const auto& l : lines[c])
            if (l.omega >= probe_freqs.front() && l.omega <= probe_freqs.back()) strongest = std::max(strongest, l.strength);
        for (std::size_t r = 0; r < probe_freqs.size(); ++r) {
            double v = 1.0;
            if (strongest > 0.0)
                for (const auto& l : lines[c])
                    v *= lorentzian_dip(probe_freqs[r], l.omega, opt.linewidth, opt.depth_scale * l.strength / strongest);
            if (opt.noise_sigma > 0.0) v += opt.noise_sigma * noise(rng);
            ds.s21_mag(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    ds.normalize_columns();
    return ds;
}

struct ExtractionOptions {
    int max_dips = 8;          // per column, deepest kept
    double prominence = 0.05;  // depth below the column median
    int neighborhood = 3;      // a candidate is the minimum over +-neighborhood samples
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    return v[mid];
}

struct Candidate {
    Eigen::Index index;
    double depth;
    double fwhm_guess;
};

// Fits baseline * prod_k dip_k over [lo, hi] for a group of neighbouring
// candidates; parameters are (baseline, centre_k, log fwhm_k, depth_k).
inline std::optional<std::vector<Dip>> fit_dip_group(const std::vector<double>& freqs, const Eigen::VectorXd& col,
                                                     Eigen::Index lo, Eigen::Index hi,
                                                     const std::vector<Candidate>& group, double baseline) {
    const Eigen::Index m = hi - lo + 1;
    const std::size_t k = group.size();
    if (m < static_cast<Eigen::Index>(3 * k + 2)) return std::nullopt;
    Eigen::VectorXd x(1 + 3 * static_cast<Eigen::Index>(k));
    x(0) = baseline;
    for (std::size_t i = 0; i < k; ++i) {
        x(1 + 3 * i) = freqs[group[i].index];
        x(2 + 3 * i) = std::log(group[i].fwhm_guess);
        x(3 + 3 * i) = std::clamp(group[i].depth / baseline, 0.01, 0.99);
    }
    auto model = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(m);
        for (Eigen::Index s = 0; s < m; ++s) {
            const double w = freqs[lo + s];
            double v = p(0);
            for (std::size_t i = 0; i < k; ++i)
                v *= lorentzian_dip(w, p(1 + 3 * i), std::exp(p(2 + 3 * i)), p(3 + 3 * i));
            r(s) = v - col(lo + s);
        }
        return r;
    };
    LmOptions lm;
    lm.max_iterations = 200;
    lm.fd_relative_step = 1e-7;
    const LmResult res = levenberg_marquardt(model, x, lm);
    if (!res.x.allFinite()) return std::nullopt;
    std::vector<Dip> out;
    const double step = (freqs.back() - freqs.front()) / std::max<std::size_t>(freqs.size() - 1, 1);
    for (std::size_t i = 0; i < k; ++i) {
        Dip d{res.x(1 + 3 * i), std::exp(res.x(2 + 3 * i)), res.x(3 + 3 * i)};
        const bool inside = d.center >= freqs[lo] && d.center <= freqs[hi];
        const bool sane = d.depth > 0.0 && d.depth <= 1.0 && d.fwhm >= step && d.fwhm <= freqs[hi] - freqs[lo];
        if (inside && sane) out.push_back(d);
    }
    return out;
}

} // namespace detail

inline std::vector<Dip> extract_column(const std::vector<double>& freqs, const Eigen::VectorXd& col,
                                       const ExtractionOptions& opt = {}) {
    const Eigen::Index n = col.size();
    std::vector<Dip> found;
    if (n < 5) return found;
    const double base = detail::median(std::vector<double>(col.data(), col.data() + n));

    std::vector<detail::Candidate> cands;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double depth = base - col(i);
        if (depth <= opt.prominence) continue;
        bool is_min = true;
        for (Eigen::Index j = std::max<Eigen::Index>(0, i - opt.neighborhood);
             j <= std::min<Eigen::Index>(n - 1, i + opt.neighborhood) && is_min; ++j)
            if (j != i && (col(j) < col(i) || (col(j) == col(i) && j < i))) is_min = false;
        if (!is_min) continue;
        // walk out to the half-depth level for a width estimate
        const double half = col(i) + 0.5 * depth;
        Eigen::Index l = i, r = i;
        while (l > 0 && col(l) < half) --l;
        while (r < n - 1 && col(r) < half) ++r;
        const double fwhm = std::max(freqs[r] - freqs[l], 2.0 * (freqs[std::min(i + 1, n - 1)] - freqs[i]));
        cands.push_back({i, depth, fwhm});
    }
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.depth > b.depth; });
    if (static_cast<int>(cands.size()) > opt.max_dips) cands.resize(opt.max_dips);
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.index < b.index; });

    // group candidates whose fit windows (+-4 fwhm) overlap
    auto window = [&](const detail::Candidate& c, bool upper) {
        const double w = freqs[c.index] + (upper ? 4.0 : -4.0) * c.fwhm_guess;
        auto it = std::lower_bound(freqs.begin(), freqs.end(), w);
        Eigen::Index idx = static_cast<Eigen::Index>(it - freqs.begin());
        if (upper) return std::min(idx, n - 1);
        return std::max<Eigen::Index>(idx, 0);
    };
    std::size_t s = 0;
    while (s < cands.size()) {
        std::vector<detail::Candidate> group{cands[s]};
        Eigen::Index lo = window(cands[s], false), hi = window(cands[s], true);
        std::size_t e = s + 1;
        while (e < cands.size() && window(cands[e], false) <= hi) {
            group.push_back(cands[e]);
            hi = std::max(hi, window(cands[e], true));
            ++e;
        }
        auto fitted = detail::fit_dip_group(freqs, col, lo, hi, group, base);
        if (!fitted) {
            warn("extract_dips: Lorentzian fit failed near " + std::to_string(freqs[cands[s].index]) + " GHz; dropped");
        } else {
            for (const Dip& d : *fitted)
                if (d.depth * base > 0.5 * opt.prominence) found.push_back(d);
        }
        s = e;
    }
    std::sort(found.begin(), found.end(), [](const Dip& a, const Dip& b) { return a.center < b.center; });
    return found;
}

inline DipSet extract_dips(const SpectroscopyDataset& ds, const ExtractionOptions& opt = {}, std::size_t workers = 0) {
    if (static_cast<std::size_t>(ds.s21_mag.rows()) != ds.probe_freqs.size() ||
        static_cast<std::size_t>(ds.s21_mag.cols()) != ds.epsilons.size()) {
        throw std::invalid_argument("extract_dips: dataset matrix does not match its axes");
    }
    DipSet out;
    out.epsilons = ds.epsilons;
    out.dips.resize(ds.epsilons.size());
    detail::parallel_for(ds.epsilons.size(), [&](std::size_t c) {
        out.dips[c] = extract_column(ds.probe_freqs, ds.s21_mag.col(static_cast<Eigen::Index>(c)), opt);
    }, workers);
    return out;
}

struct DipAssignment {
    std::size_t epsilon_index = 0;
    std::size_t dip_index = 0;
    int i = -1, j = -1;      // -1 when rejected
    double residual = 0.0;   // measured - model, GHz
};

struct FitResult {
    RabiParams params;            // epsilon unused
    double residual_rms = 0.0;    // GHz, over assigned dips
    std::vector<DipAssignment> assignments;
    std::array<double, 3> covariance_diag{}; // (delta, omega_o, g), GHz^2
    int iterations = 0;
    bool converged = false;
};

struct FitOptions {
    std::vector<LevelPair> transitions = default_transition_pairs();
    double linewidth = 0.03;      // sets the rejection radius
    double rejection_linewidths = 5.0;
    std::vector<double> warmup_radii{2.0, 0.5}; // GHz, coarse-to-fine assignment stages
    int n_max = 0;                // 0 = adaptive, with margin on g
    int max_iterations = 60;
    int scan_points = 7;          // per axis of the (delta, g) start scan; <= 1 disables it
    double scan_span = 0.4;       // log-range of the scan either side of the initial guess
    int starts = 3;               // fits seeded: the initial guess plus the best scan points
    int polish_rounds = 3;        // local refits from kicks around the best fit; 0 disables
    double polish_step = 0.03;    // log-size of the smallest kick
    std::size_t workers = 0;
};

namespace detail {

// Each measured centre goes to its nearest model line; beyond `radius` it
// stays unassigned. Several dips may share a line, which keeps the residual
// continuous in the model parameters.
inline std::vector<std::pair<int, double>> nearest_assign(const std::vector<Dip>& dips,
                                                          const std::vector<double>& model, double radius) {
    std::vector<std::pair<int, double>> out(dips.size(), {-1, 0.0});
    for (std::size_t d = 0; d < dips.size(); ++d) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < model.size(); ++t) {
            const double diff = dips[d].center - model[t];
            if (std::abs(diff) < best) {
                best = std::abs(diff);
                if (best <= radius) out[d] = {static_cast<int>(t), diff};
            }
        }
    }
    return out;
}

class SpectrumModel {
public:
    SpectrumModel(const DipSet& dips, const FitOptions& opt, int n_max)
        : dips_(dips), opt_(opt), n_max_(n_max), k_(levels_needed(opt.transitions)) {
        for (std::size_t c = 0; c < dips.dips.size(); ++c)
            if (!dips.dips[c].empty()) columns_.push_back(c);
        for (std::size_t c : columns_) count_ += dips.dips[c].size();
        for (std::size_t c : columns_) abs_eps_.push_back(std::abs(dips.epsilons[c]));
        std::sort(abs_eps_.begin(), abs_eps_.end());
        abs_eps_.erase(std::unique(abs_eps_.begin(), abs_eps_.end()), abs_eps_.end());
        for (std::size_t c : columns_) {
            const auto it = std::lower_bound(abs_eps_.begin(), abs_eps_.end(), std::abs(dips.epsilons[c]));
            column_to_abs_.push_back(static_cast<std::size_t>(it - abs_eps_.begin()));
        }
    }

    std::size_t dip_count() const { return count_; }

    // Model transition frequencies per populated column. The spectrum is even
    // in epsilon, so each |epsilon| is diagonalized once.
    std::vector<std::vector<double>> frequencies(const Eigen::Vector3d& theta) const {
        const RabiParams p{theta(0), theta(1), theta(2), 0.0};
        std::vector<std::vector<double>> unique(abs_eps_.size());
        parallel_for(abs_eps_.size(), [&](std::size_t u) {
            const Eigen::VectorXd e = lowest_energies(p.with_epsilon(abs_eps_[u]), n_max_, k_);
            unique[u].reserve(opt_.transitions.size());
            for (const auto& [i, j] : opt_.transitions) unique[u].push_back(e(j) - e(i));
        }, opt_.workers);
        std::vector<std::vector<double>> out(columns_.size());
        for (std::size_t idx = 0; idx < columns_.size(); ++idx) out[idx] = unique[column_to_abs_[idx]];
        return out;
    }

    std::vector<DipAssignment> assign(const Eigen::Vector3d& theta, double radius) const {
        const auto freqs = frequencies(theta);
        std::vector<DipAssignment> out;
        for (std::size_t idx = 0; idx < columns_.size(); ++idx) {
            const std::size_t c = columns_[idx];
            const auto match = nearest_assign(dips_.dips[c], freqs[idx], radius);
            for (std::size_t d = 0; d < match.size(); ++d) {
                DipAssignment a;
                a.epsilon_index = c;
                a.dip_index = d;
                if (match[d].first >= 0) {
                    a.i = opt_.transitions[match[d].first].first;
                    a.j = opt_.transitions[match[d].first].second;
                    a.residual = match[d].second;
                }
                out.push_back(a);
            }
        }
        return out;
    }

    // Fixed-length residual vector, clipped at the radius so it stays continuous.
    Eigen::VectorXd residuals(const Eigen::Vector3d& theta, double radius) const {
        if (!theta.allFinite() || theta.minCoeff() <= 0.0 || theta.maxCoeff() > 1e3) {
            return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(count_), 4.0 * radius);
        }
        const auto assigned = assign(theta, radius);
        Eigen::VectorXd r(static_cast<Eigen::Index>(assigned.size()));
        for (std::size_t k = 0; k < assigned.size(); ++k)
            r(static_cast<Eigen::Index>(k)) = assigned[k].i >= 0 ? std::abs(assigned[k].residual) : radius;
        return r;
    }

private:
    const DipSet& dips_;
    FitOptions opt_;
    int n_max_;
    int k_;
    std::vector<std::size_t> columns_;
    std::vector<double> abs_eps_;
    std::vector<std::size_t> column_to_abs_;
    std::size_t count_ = 0;
};

} // namespace detail

inline int fit_truncation(const DipSet& dips, const RabiParams& initial, const FitOptions& opt) {
    double eps_max = 0.0;
    for (std::size_t c = 0; c < dips.epsilons.size(); ++c)
        if (!dips.dips[c].empty()) eps_max = std::max(eps_max, std::abs(dips.epsilons[c]));
    RabiParams probe = initial.with_epsilon(eps_max);
    probe.g *= 1.8; // room for the scan and the optimizer to move g upward
    return adaptive_truncation(probe, levels_needed(opt.transitions) + 1, {1e-10, 30, 2000}).n_max_used;
}

// Least-squares fit of (delta, omega_o, g) to measured dip centres.
// The optimizer works in log-parameters so all three stay positive, and
// shrinks the assignment radius in stages down to the rejection radius.
inline FitResult fit_parameters(const DipSet& dips, const RabiParams& initial, const FitOptions& opt = {}) {
    initial.validate();
    if (opt.transitions.empty()) throw std::invalid_argument("fit_parameters: no transitions considered");
    const int n_max = opt.n_max > 0 ? opt.n_max : fit_truncation(dips, initial, opt);
    const detail::SpectrumModel model(dips, opt, n_max);
    const double reject = opt.rejection_linewidths * opt.linewidth;

    Eigen::Vector3d theta(initial.delta, initial.omega_o, initial.g);
    {
        if (model.dip_count() < 3) throw std::domain_error("fit_parameters: need at least 3 dips, have " + std::to_string(model.dip_count()));
        const auto first = model.assign(theta, std::max(reject, opt.warmup_radii.empty() ? reject : opt.warmup_radii.front()));
        std::vector<LevelPair> seen;
        for (const auto& a : first)
            if (a.i >= 0 && std::find(seen.begin(), seen.end(), LevelPair{a.i, a.j}) == seen.end()) seen.push_back({a.i, a.j});
        if (seen.size() < 2) {
            throw std::domain_error("fit_parameters: dips span fewer than 2 distinct transitions; parameters not identifiable");
        }
    }

    std::vector<double> radii;
    for (double r : opt.warmup_radii)
        if (r > reject) radii.push_back(r);
    radii.push_back(reject);

    detail::LmOptions lm;
    lm.max_iterations = opt.max_iterations;
    lm.fd_relative_step = 1e-6;
    lm.step_tol = 1e-10;
    lm.cost_tol = 1e-15;
    auto staged = [&](Eigen::Vector3d start, int& iterations, bool& converged) {
        for (double radius : radii) {
            auto fn = [&](const Eigen::VectorXd& u) { return model.residuals(u.array().exp().matrix(), radius); };
            const detail::LmResult res =
                detail::levenberg_marquardt(fn, Eigen::VectorXd(start.array().log().matrix()), lm);
            start = res.x.array().exp().matrix();
            iterations += res.iterations;
            converged = res.converged;
        }
        return start;
    };

    // omega_o first: the oscillator-like lines dominate the data, so a 1-D
    // scan at the initial (delta, g) places it reliably
    if (opt.scan_points > 1) {
        const double wide = radii.front();
        const int m = 8 * opt.scan_points;
        double best = std::numeric_limits<double>::infinity();
        double w_best = theta(1);
        for (int k = 0; k < m; ++k) {
            const double w = theta(1) * std::exp(-opt.scan_span + 2.0 * opt.scan_span * k / (m - 1));
            const double cost = model.residuals(Eigen::Vector3d(theta(0), w, theta(2)), wide).squaredNorm();
            if (cost < best) {
                best = cost;
                w_best = w;
            }
        }
        theta(1) = w_best;
    }

    // coarse (delta, g) scan with omega_o profiled out, ranked by the cost at
    // the widest assignment radius; the best few seed full fits
    std::vector<std::pair<double, Eigen::Vector3d>> seeds{{0.0, theta}};
    if (opt.scan_points > 1 && opt.starts > 1) {
        const double wide = radii.front();
        detail::LmOptions lm1 = lm;
        lm1.max_iterations = 12;
        lm1.step_tol = 1e-8;
        for (int a = 0; a < opt.scan_points; ++a)
            for (int b = 0; b < opt.scan_points; ++b) {
                const double fa = -opt.scan_span + 2.0 * opt.scan_span * a / (opt.scan_points - 1);
                const double fb = -opt.scan_span + 2.0 * opt.scan_span * b / (opt.scan_points - 1);
                Eigen::Vector3d t(theta(0) * std::exp(fa), theta(1), theta(2) * std::exp(fb));
                auto fn = [&](const Eigen::VectorXd& u) {
                    return model.residuals(Eigen::Vector3d(t(0), std::exp(u(0)), t(2)), wide);
                };
                const detail::LmResult res =
                    detail::levenberg_marquardt(fn, Eigen::VectorXd::Constant(1, std::log(t(1))), lm1);
                t(1) = std::exp(res.x(0));
                seeds.emplace_back(2.0 * res.cost, t);
            }
        std::stable_sort(seeds.begin() + 1, seeds.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        seeds.resize(std::min<std::size_t>(seeds.size(), static_cast<std::size_t>(opt.starts)));
    }

    int iterations = 0;
    bool converged = false;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& seed : seeds) {
        int it = 0;
        bool ok = false;
        const Eigen::Vector3d t = staged(seed.second, it, ok);
        iterations += it;
        const double cost = model.residuals(t, reject).squaredNorm();
        if (cost < best_cost) {
            best_cost = cost;
            theta = t;
            converged = ok;
        }
    }
    // nearby lines can swap assignments and leave a shallow neighbouring
    // minimum; refit from small (delta, g) kicks until none lowers the cost
    if (opt.polish_rounds > 0) {
        auto fn = [&](const Eigen::VectorXd& u) { return model.residuals(u.array().exp().matrix(), reject); };
        const std::array<Eigen::Vector3d, 3> directions{Eigen::Vector3d(1, 0, 1), Eigen::Vector3d(1, 0, 0),
                                                       Eigen::Vector3d(0, 0, 1)};
        for (int round = 0; round < opt.polish_rounds; ++round) {
            bool improved = false;
            for (const auto& dir : directions)
                for (double kick : {-2.0, -1.0, 1.0, 2.0}) {
                    const Eigen::Vector3d u = theta.array().log().matrix() + kick * opt.polish_step * dir;
                    const detail::LmResult res = detail::levenberg_marquardt(fn, Eigen::VectorXd(u), lm);
                    iterations += res.iterations;
                    const double cost = 2.0 * res.cost;
                    if (res.converged && cost < best_cost * (1.0 - 1e-6)) {
                        best_cost = cost;
                        theta = res.x.array().exp().matrix();
                        improved = true;
                    }
                }
            if (!improved) break;
        }
    }
    if (!converged) {
        throw NumericalError("fit_parameters: optimizer did not converge within " + std::to_string(opt.max_iterations) +
                             " iterations per stage");
    }

    FitResult out;
    out.params = RabiParams{theta(0), theta(1), theta(2), 0.0};
    out.assignments = model.assign(theta, reject);
    out.iterations = iterations;
    out.converged = converged;
    double ss = 0.0;
    int n_assigned = 0;
    for (const auto& a : out.assignments)
        if (a.i >= 0) {
            ss += a.residual * a.residual;
            ++n_assigned;
        }
    if (n_assigned < 3) {
        throw NumericalError("fit_parameters: only " + std::to_string(n_assigned) +
                             " dips lie within the rejection radius of a model line");
    }
    out.residual_rms = std::sqrt(ss / n_assigned);

    // covariance diagonal sigma^2 (J^T J)^-1 in linear parameters
    auto lin = [&](const Eigen::VectorXd& t) { return model.residuals(t, reject); };
    const Eigen::VectorXd r0 = lin(Eigen::VectorXd(theta));
    const Eigen::MatrixXd jac = detail::numeric_jacobian(lin, Eigen::VectorXd(theta), r0, 1e-6);
    const int dof = std::max(n_assigned - 3, 1);
    const double sigma2 = ss / dof;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::MatrixXd cov = sigma2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
    for (int k = 0; k < 3; ++k) out.covariance_diag[k] = cov(k, k);
    return out;
}

// Temperature (mK) from the ratio of dip depths |1>->|3> : |0>->|2>, read
// as the Boltzmann population ratio p1/p0 = exp(-h omega01 / k_B T).
inline double estimate_temperature(double depth_ratio, double omega01_ghz) {
    if (!(omega01_ghz > 0.0)) throw std::invalid_argument("estimate_temperature: omega01 must be > 0");
    if (!(depth_ratio > 0.0)) throw std::invalid_argument("estimate_temperature: ratio must be > 0");
    if (depth_ratio >= 1.0) {
        throw std::domain_error("estimate_temperature: ratio >= 1 implies population inversion; not converted");
    }
    const double kelvin = omega01_ghz / units::boltzmann_ghz_per_kelvin / std::log(1.0 / depth_ratio);
    return kelvin * 1e3;
}

} // namespace dsc
