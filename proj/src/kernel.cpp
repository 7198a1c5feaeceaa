#include "npef/kernel.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "npef/errors.hpp"

namespace npef {

namespace {

void check_spec(const KernelSpec& spec) {
    if (!(spec.h > 0.0)) throw InputError("KernelSpec: bandwidth h must be positive");
    if (spec.dim < 1) throw InputError("KernelSpec: dim must be >= 1");
}

double sq_norm(std::span<const double> u) {
    double s = 0.0;
    for (double v : u) s += v * v;
    return s;
}

}  // namespace

KernelSpec KernelSpec::gaussian(double h, int dim) { return {KernelFamily::Gaussian, h, dim, 0.0}; }
KernelSpec KernelSpec::uniform(double h, int dim) { return {KernelFamily::Uniform, h, dim, 0.0}; }
KernelSpec KernelSpec::smoothed_uniform(double h, int dim, double steepness) {
    return {KernelFamily::SmoothedUniform, h, dim, steepness};
}
KernelSpec KernelSpec::quadratic(double h, int dim) { return {KernelFamily::Quadratic, h, dim, 0.0}; }

const char* family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::Uniform: return "uniform";
        case KernelFamily::SmoothedUniform: return "smoothed";
        case KernelFamily::Quadratic: return "quadratic";
    }
    return "?";
}

KernelFamily family_from_name(const std::string& name) {
    if (name == "gaussian") return KernelFamily::Gaussian;
    if (name == "uniform") return KernelFamily::Uniform;
    if (name == "smoothed" || name == "smoothed_uniform") return KernelFamily::SmoothedUniform;
    if (name == "quadratic") return KernelFamily::Quadratic;
    throw InputError("unknown kernel family: " + name);
}

double eval_base(const KernelSpec& spec, std::span<const double> u) {
    check_spec(spec);
    if (static_cast<int>(u.size()) != spec.dim)
        throw InputError("eval_base: dimension mismatch");
    switch (spec.family) {
        case KernelFamily::Gaussian: {
            const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * spec.dim);
            return norm * std::exp(-0.5 * sq_norm(u));
        }
        case KernelFamily::Uniform: {
            // Indicator of the hypercube with side 1 centered at the origin.
            for (double v : u)
                if (std::abs(v) > 0.5) return 0.0;
            return 1.0;
        }
        case KernelFamily::SmoothedUniform: {
            // Logistic smoothing of the radius-1/2 indicator; the steepness is
            // given in data units, so rescale by h to stay dimensionless here.
            const double s = spec.effective_steepness() * spec.h;
            return 1.0 / (1.0 + std::exp(s * (std::sqrt(sq_norm(u)) - 0.5)));
        }
        case KernelFamily::Quadratic:
            return -sq_norm(u);
    }
    return 0.0;
}

double eval_scaled(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> center) {
    check_spec(spec);
    if (x.size() != center.size() || static_cast<int>(x.size()) != spec.dim)
        throw InputError("eval_scaled: dimension mismatch");
    double u[16];
    std::vector<double> u_heap;
    std::span<double> us;
    if (spec.dim <= 16) {
        us = {u, static_cast<std::size_t>(spec.dim)};
    } else {
        u_heap.resize(spec.dim);
        us = u_heap;
    }
    for (int i = 0; i < spec.dim; ++i) us[i] = (x[i] - center[i]) / spec.h;
    const double base = eval_base(spec, us);
    if (spec.is_density()) return base * std::pow(spec.h, -spec.dim);
    return base;
}

std::string KernelSpec::to_json() const {
    nlohmann::json j;
    j["family"] = family_name(family);
    j["h"] = h;
    j["dim"] = dim;
    if (family == KernelFamily::SmoothedUniform)
        j["steepness"] = effective_steepness();
    else
        j["steepness"] = nullptr;
    return j.dump();
}

KernelSpec KernelSpec::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    KernelSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.h = j.at("h").get<double>();
    spec.dim = j.at("dim").get<int>();
    if (j.contains("steepness") && !j["steepness"].is_null())
        spec.steepness = j["steepness"].get<double>();
    check_spec(spec);
    return spec;
}

}  // namespace npef
