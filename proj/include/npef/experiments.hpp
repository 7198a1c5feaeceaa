#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npef/ergm.hpp"
#include "npef/graph.hpp"
#include "npef/npexp.hpp"
#include "npef/samples.hpp"

namespace npef {

struct Generator {
    enum class Kind { Normal, Mixture2, StudentT };
    Kind kind = Kind::Normal;
    double mu = 0.0, sigma = 1.0;                              // Normal
    double mu1 = -3.0, sigma1 = 1.0, mu2 = 3.0, sigma2 = 1.0;  // Mixture2
    double weight = 0.5;
    double df = 6.0;  // StudentT

    static Generator normal(double mu, double sigma);
    static Generator mixture2(double mu1, double sigma1, double mu2, double sigma2, double w);
    static Generator student_t(double df);
    static Generator parse(const std::string& text);  // e.g. "mixture2(-3,1,3,1,0.5)"

    std::string name() const;
    SampleSet draw(std::size_t n, std::uint64_t seed) const;
    double log_density(double x) const;
    // True (E[x], E[x^2]); absent for StudentT with df <= 2.
    std::optional<std::vector<double>> true_moments() const;
};

struct ExperimentSpec {
    Generator generator;
    std::vector<std::size_t> n_grid = {10, 100, 1000};
    std::size_t eval_n = 100000;
    std::vector<std::uint64_t> seeds;
    BetaSchedule schedule = BetaSchedule::inv_sqrt();
    std::vector<double> h_grid = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
    std::optional<double> fixed_h;  // skip cross-validation when set
    std::vector<std::string> methods = {"NPG", "NPG-lgN", "CNPG", "KDE", "MLE"};
    int cv_folds = 5;

    void validate() const;
};

struct DensityCell {
    std::string generator;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string method;
    double held_out_ll = 0.0;
    int nonzero = 0;
    double h = 0.0;
    std::string error;  // nonempty when the sub-fit failed
};

struct DensityResults {
    std::vector<DensityCell> cells;

    void write_csv(const std::string& path) const;
    static DensityResults read_csv(const std::string& path);
    // Median held-out LL over seeds for one (n, method); ignores failed cells.
    double median_ll(std::size_t n, const std::string& method) const;
    double median_nonzero(std::size_t n, const std::string& method) const;
    double mad_ll(std::size_t n, const std::string& method) const;
};

DensityResults run_density_experiment(const ExperimentSpec& spec);

// Deterministic 8-node graph with 22 edges and 29 triangles.
Graph g8_example_graph();

struct G8Report {
    FeatureHistogram hist;
    ErgmModel ergm;
    ErgmModel nergm;
    std::pair<long long, long long> ergm_mode;
    std::pair<long long, long long> nergm_mode;
    double ergm_box_mass = 0.0;   // |e-22|<=2 and |t-29|<=5
    double nergm_box_mass = 0.0;
    double ergm_total_mass = 0.0;
    double nergm_total_mass = 0.0;
};

// Exact ERGM vs mass-preserving fit on the 8-node example (h=8, beta=0.2).
G8Report run_g8_experiment(double h = 8.0, double beta = 0.2);
void write_g8_report(const G8Report& report, const std::string& out_dir);

// Long-form CSVs for external plotting: kind in {ll-vs-n, nonzero-vs-n}.
void emit_plot_data(const DensityResults& results, const std::string& kind,
                    const std::string& path);

// Columns x,method,density for each labeled model on a uniform grid.
void emit_density_curve(const std::vector<std::pair<std::string, NpExpModel>>& models, double lo,
                        double hi, int points, const std::string& path);

std::pair<long long, long long> mass_mode(
    const std::map<std::pair<long long, long long>, double>& mass);
double box_mass(const std::map<std::pair<long long, long long>, double>& mass, long long ce,
                long long ct, long long re, long long rt);

}  // namespace npef
