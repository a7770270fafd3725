// ground_state_summary.cpp - ground-state properties of every preset

#include <cstdio>

#include "dsc/dsc.hpp"

int main() {
    std::printf("%-8s %6s %10s %10s %10s %10s\n", "preset", "alpha", "E_gs", "formula", "F_cat", "omega01");
    for (const auto& pr : dsc::presets) {
        const dsc::RabiParams& p = pr.params;
        const dsc::EigenSystem es = dsc::adaptive_truncation(p, 2);
        const double alpha = p.alpha();
        const auto formula = dsc::vn_entanglement_approx(alpha, dsc::EntropyApprox::exact_formula);
        const auto spec = dsc::cat_spec_for_level(0, alpha, false);
        const dsc::JointState cat = dsc::cat_state(spec, dsc::FockSpace(es.n_max_used));
        std::printf("%-8s %6.3f %10.6f %10.6f %10.6f %10.6f\n", std::string(pr.id).c_str(), alpha,
                    dsc::vn_entanglement(es.states[0]), formula.value, dsc::fidelity(es.states[0], cat), es.gap(0, 1));
    }
    return 0;
}
