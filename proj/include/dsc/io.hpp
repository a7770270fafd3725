// io.hpp - CSV and flat key-value text I/O for sweeps, grids, datasets and fits

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsc/circuit.hpp"
#include "dsc/specfit.hpp"
#include "dsc/spectrum.hpp"
#include "dsc/wigner.hpp"

namespace dsc::io {

inline constexpr int csv_precision = 17;

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline std::ostream& full_precision(std::ostream& os) {
    os << std::setprecision(csv_precision);
    return os;
}

inline void write_sweep_csv(std::ostream& os, const BiasSweep& sweep) {
    full_precision(os) << "epsilon_ghz,i,j,omega_ij_ghz,re_tij,im_tij,allowed\n";
    for (const auto& table : sweep.tables)
        for (const auto& t : table.entries)
            os << table.epsilon << ',' << t.i << ',' << t.j << ',' << t.omega << ',' << t.t.real() << ','
               << t.t.imag() << ',' << (t.allowed ? 1 : 0) << '\n';
}

struct EntanglementRow {
    std::string preset;
    double alpha = 0.0;
    double e_gs_exact = 0.0;
    double e_gs_formula = 0.0;
    double e_gs_second_order = 0.0;
    double temperature_mk = 0.0;
    double e_te_exact = 0.0;
    double e_te_estimate = 0.0;
};

inline void write_entanglement_csv(std::ostream& os, const std::vector<EntanglementRow>& rows) {
    full_precision(os) << "preset,alpha,e_gs_exact,e_gs_formula,e_gs_second_order,temperature_mk,e_te_exact,e_te_estimate\n";
    for (const auto& r : rows)
        os << r.preset << ',' << r.alpha << ',' << r.e_gs_exact << ',' << r.e_gs_formula << ','
           << r.e_gs_second_order << ',' << r.temperature_mk << ',' << r.e_te_exact << ',' << r.e_te_estimate << '\n';
}

// Rows ordered by re_alpha, then im_alpha.
inline void write_wigner_csv(std::ostream& os, const WignerGrid& grid) {
    full_precision(os) << "re_alpha,im_alpha,w\n";
    for (std::size_t i = 0; i < grid.re_alpha.size(); ++i)
        for (std::size_t j = 0; j < grid.im_alpha.size(); ++j)
            os << grid.re_alpha[i] << ',' << grid.im_alpha[j] << ','
               << grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
}

inline void write_coupler_csv(std::ostream& os, const std::vector<circuit::SweepPoint>& pts) {
    full_precision(os) << "n_phi_q,phi1_L,phi2_L,phi3_L,phi1_R,phi2_R,phi3_R,l_c_ph,l_qc_L_ph,l_qc_R_ph,l_qc_g_ph,l_qc_e_ph,"
                          "m_L_ph,m_R_ph,m_ph\n";
    for (const auto& p : pts) {
        const auto& s = p.inductances;
        os << s.n_phi_q;
        for (double v : p.states.left.phi) os << ',' << v;
        for (double v : p.states.right.phi) os << ',' << v;
        os << ',' << s.l_c() << ',' << s.l_qc_left << ',' << s.l_qc_right << ',' << s.l_qc_g << ',' << s.l_qc_e << ','
           << s.m.left << ',' << s.m.right << ',' << s.m.mean() << '\n';
    }
}

inline void write_dataset_csv(std::ostream& os, const SpectroscopyDataset& ds) {
    full_precision(os) << "epsilon_ghz,probe_ghz,s21\n";
    for (std::size_t c = 0; c < ds.epsilons.size(); ++c)
        for (std::size_t r = 0; r < ds.probe_freqs.size(); ++r)
            os << ds.epsilons[c] << ',' << ds.probe_freqs[r] << ','
               << ds.s21_mag(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) << '\n';
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline std::string trim(std::string s) {
    const auto ws = [](unsigned char ch) { return std::isspace(ch) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

inline double parse_number(const std::string& cell, std::size_t line) {
    const std::string t = trim(cell);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + t + "'", line);
    }
    if (used != t.size() || !std::isfinite(v)) throw ParseError("not a finite number: '" + t + "'", line);
    return v;
}

// Index of v in a sorted, de-duplicated axis.
inline std::size_t axis_index(const std::vector<double>& axis, double v) {
    return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
}

} // namespace detail

// Header `epsilon_ghz,probe_ghz,s21` (columns in any order); rows in any
// order; the (epsilon, probe) grid must be complete and without duplicates.
inline SpectroscopyDataset read_dataset_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) break;
    }
    if (detail::trim(line).empty()) throw ParseError("empty dataset", line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split(line, ',');
    int col_eps = -1, col_probe = -1, col_s21 = -1;
    for (std::size_t k = 0; k < header.size(); ++k) {
        const std::string h = detail::trim(header[k]);
        if (h == "epsilon_ghz") col_eps = static_cast<int>(k);
        else if (h == "probe_ghz") col_probe = static_cast<int>(k);
        else if (h == "s21") col_s21 = static_cast<int>(k);
    }
    if (col_eps < 0 || col_probe < 0 || col_s21 < 0) {
        throw ParseError("header must contain epsilon_ghz, probe_ghz and s21", line_no);
    }

    struct Row {
        double eps, probe, s21;
        std::size_t line;
    };
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()),
                             line_no);
        }
        rows.push_back({detail::parse_number(cells[col_eps], line_no), detail::parse_number(cells[col_probe], line_no),
                        detail::parse_number(cells[col_s21], line_no), line_no});
    }
    if (rows.empty()) throw ParseError("dataset has no data rows", line_no);

    SpectroscopyDataset ds;
    for (const auto& r : rows) {
        ds.epsilons.push_back(r.eps);
        ds.probe_freqs.push_back(r.probe);
    }
    for (auto* axis : {&ds.epsilons, &ds.probe_freqs}) {
        std::sort(axis->begin(), axis->end());
        axis->erase(std::unique(axis->begin(), axis->end()), axis->end());
    }
    const std::size_t n_eps = ds.epsilons.size(), n_probe = ds.probe_freqs.size();
    ds.s21_mag = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n_probe), static_cast<Eigen::Index>(n_eps),
                                           std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : rows) {
        const auto c = static_cast<Eigen::Index>(detail::axis_index(ds.epsilons, r.eps));
        const auto p = static_cast<Eigen::Index>(detail::axis_index(ds.probe_freqs, r.probe));
        if (!std::isnan(ds.s21_mag(p, c))) throw ParseError("duplicate grid point", r.line);
        ds.s21_mag(p, c) = r.s21;
    }
    if (rows.size() != n_eps * n_probe) {
        throw ParseError("grid is not rectangular: " + std::to_string(rows.size()) + " rows for " +
                             std::to_string(n_eps) + " x " + std::to_string(n_probe) + " points",
                         line_no);
    }
    ds.normalize_columns();
    return ds;
}

inline SpectroscopyDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_dataset_csv(in);
}

// Flat JSON-style document, one "key": value per line.
inline void write_fit_result(std::ostream& os, const FitResult& fit) {
    std::size_t assigned = 0;
    for (const auto& a : fit.assignments)
        if (a.i >= 0) ++assigned;
    full_precision(os) << "{\n"
                       << "  \"delta_ghz\": " << fit.params.delta << ",\n"
                       << "  \"omega_o_ghz\": " << fit.params.omega_o << ",\n"
                       << "  \"g_ghz\": " << fit.params.g << ",\n"
                       << "  \"residual_rms_ghz\": " << fit.residual_rms << ",\n"
                       << "  \"var_delta_ghz2\": " << fit.covariance_diag[0] << ",\n"
                       << "  \"var_omega_o_ghz2\": " << fit.covariance_diag[1] << ",\n"
                       << "  \"var_g_ghz2\": " << fit.covariance_diag[2] << ",\n"
                       << "  \"dips_assigned\": " << assigned << ",\n"
                       << "  \"dips_total\": " << fit.assignments.size() << ",\n"
                       << "  \"iterations\": " << fit.iterations << "\n"
                       << "}\n";
}

inline void write_dip_assignments_csv(std::ostream& os, const DipSet& dips, const FitResult& fit) {
    full_precision(os) << "epsilon_ghz,center_ghz,fwhm_ghz,depth,i,j,residual_ghz\n";
    for (const auto& a : fit.assignments) {
        const Dip& d = dips.dips[a.epsilon_index][a.dip_index];
        os << dips.epsilons[a.epsilon_index] << ',' << d.center << ',' << d.fwhm << ',' << d.depth << ',' << a.i << ','
           << a.j << ',' << a.residual << '\n';
    }
}

} // namespace dsc::io
