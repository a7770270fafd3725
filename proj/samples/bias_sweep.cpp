// bias_sweep.cpp - lowest transitions of one preset against flux bias
//
// usage: sample_bias_sweep [preset] [steps]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "dsc/dsc.hpp"

int main(int argc, char** argv) {
    const std::string id = argc > 1 ? argv[1] : "I_m0p5";
    const int steps = argc > 2 ? std::atoi(argv[2]) : 33;
    const auto pr = dsc::find_preset(id);
    if (!pr || steps < 1) {
        std::fprintf(stderr, "usage: %s [preset] [steps]\n", argv[0]);
        return 2;
    }
    const auto pairs = dsc::default_transition_pairs();
    const dsc::BiasSweep sweep = dsc::bias_sweep(pr->params, dsc::linspace(-8.0, 8.0, steps), pairs);
    std::printf("# %s, n_max %d\n", id.c_str(), sweep.n_max_used);
    std::printf("%10s", "eps");
    for (const auto& [i, j] : pairs) std::printf("   omega%d%d  |t%d%d|", i, j, i, j);
    std::printf("\n");
    for (const auto& table : sweep.tables) {
        std::printf("%10.4f", table.epsilon);
        for (const auto& t : table.entries) std::printf(" %9.5f %7.4f", t.omega, std::abs(t.t));
        std::printf("\n");
    }
    return 0;
}
