// Fits GELU with Hermite and Fourier activations of a few degrees and prints
// the value/derivative errors of Lagrange vs Hermite-interpolation fits.

#include <cstdio>

#include "orthoact/fitting.hpp"

int main() {
    using namespace orthoact;
    const FitTarget gelu = parse_target("gelu");
    const FitGrid grid{-4.0, 4.0, 401};

    std::printf("%-8s %-6s %-9s %-12s %-12s\n", "family", "degree", "mode", "value_rmse", "deriv_rmse");
    for (Family family : {Family::Hermite, Family::Fourier}) {
        for (int degree : {3, 6, 8}) {
            for (FitMode mode : {FitMode::Lagrange, FitMode::HermiteInterp}) {
                const auto r = fit(gelu, family, degree, grid, mode);
                std::printf("%-8s %-6d %-9s %-12.3e %-12.3e\n", std::string(family_name(family)).c_str(), degree,
                            std::string(fit_mode_name(mode)).c_str(), r.value_rmse, r.deriv_rmse);
            }
        }
    }
    return 0;
}
