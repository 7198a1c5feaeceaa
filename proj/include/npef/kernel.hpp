#pragma once

#include <span>
#include <string>

namespace npef {

enum class KernelFamily { Gaussian, Uniform, SmoothedUniform, Quadratic };

// Kernel with isotropic bandwidth matrix H = h^2 * I_d.
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double h = 1.0;
    int dim = 1;
    // Logistic steepness for SmoothedUniform, in data units (1/length).
    // Defaults to 20/h when not set explicitly.
    double steepness = 0.0;

    static KernelSpec gaussian(double h, int dim = 1);
    static KernelSpec uniform(double h, int dim = 1);
    static KernelSpec smoothed_uniform(double h, int dim = 1, double steepness = 0.0);
    static KernelSpec quadratic(double h, int dim = 1);

    // Gaussian and Uniform integrate to one after bandwidth scaling; the other
    // two are feature shapes only and are rejected by the KDE.
    bool is_density() const {
        return family == KernelFamily::Gaussian || family == KernelFamily::Uniform;
    }

    double effective_steepness() const { return steepness > 0.0 ? steepness : 20.0 / h; }

    std::string to_json() const;
    static KernelSpec from_json(const std::string& text);
};

const char* family_name(KernelFamily f);
KernelFamily family_from_name(const std::string& name);

// Unscaled kernel value K(u). Symmetric in u -> -u.
double eval_base(const KernelSpec& spec, std::span<const double> u);

// |H|^{-1/2} K((x - center)/h) for density kernels; SmoothedUniform and
// Quadratic are evaluated in data units without the |H|^{-1/2} prefactor,
// as they are feature shapes rather than densities.
double eval_scaled(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> center);

}  // namespace npef
