#include "npef/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "npef/errors.hpp"

namespace npef {

namespace {

double normal_log_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

std::vector<double> parse_args(std::string inside) {
    std::vector<double> out;
    std::replace(inside.begin(), inside.end(), ';', ',');
    std::istringstream ss(inside);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw InputError("bad generator argument: " + tok);
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

Generator Generator::normal(double mu, double sigma) {
    Generator g;
    g.kind = Kind::Normal;
    g.mu = mu;
    g.sigma = sigma;
    return g;
}

Generator Generator::mixture2(double mu1, double sigma1, double mu2, double sigma2, double w) {
    Generator g;
    g.kind = Kind::Mixture2;
    g.mu1 = mu1;
    g.sigma1 = sigma1;
    g.mu2 = mu2;
    g.sigma2 = sigma2;
    g.weight = w;
    return g;
}

Generator Generator::student_t(double df) {
    Generator g;
    g.kind = Kind::StudentT;
    g.df = df;
    return g;
}

Generator Generator::parse(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw InputError("generator spec must look like name(arg,...): " + text);
    const std::string name = text.substr(0, open);
    const auto args = parse_args(text.substr(open + 1, close - open - 1));
    if (name == "normal") {
        if (args.size() != 2) throw InputError("normal(mu,sigma) takes two arguments");
        if (!(args[1] > 0.0)) throw InputError("normal: sigma must be positive");
        return normal(args[0], args[1]);
    }
    if (name == "mixture2") {
        if (args.size() != 5)
            throw InputError("mixture2(mu1,sigma1,mu2,sigma2,weight) takes five arguments");
        if (!(args[1] > 0.0) || !(args[3] > 0.0))
            throw InputError("mixture2: sigmas must be positive");
        if (!(args[4] > 0.0) || !(args[4] < 1.0))
            throw InputError("mixture2: weight must be in (0,1)");
        return mixture2(args[0], args[1], args[2], args[3], args[4]);
    }
    if (name == "student-t" || name == "studentt") {
        if (args.size() != 1) throw InputError("student-t(df) takes one argument");
        if (!(args[0] > 0.0)) throw InputError("student-t: df must be positive");
        return student_t(args[0]);
    }
    throw InputError("unknown generator: " + name);
}

std::string Generator::name() const {
    // Semicolon-separated so the label stays a single CSV field.
    std::ostringstream ss;
    switch (kind) {
        case Kind::Normal: ss << "normal(" << mu << ';' << sigma << ')'; break;
        case Kind::Mixture2:
            ss << "mixture2(" << mu1 << ';' << sigma1 << ';' << mu2 << ';' << sigma2 << ';'
               << weight << ')';
            break;
        case Kind::StudentT: ss << "student-t(" << df << ')'; break;
    }
    return ss.str();
}

SampleSet Generator::draw(std::size_t n, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<double> xs(n);
    switch (kind) {
        case Kind::Normal: {
            std::normal_distribution<double> dist(mu, sigma);
            for (auto& x : xs) x = dist(rng);
            break;
        }
        case Kind::Mixture2: {
            std::bernoulli_distribution pick(weight);
            std::normal_distribution<double> d1(mu1, sigma1), d2(mu2, sigma2);
            for (auto& x : xs) x = pick(rng) ? d1(rng) : d2(rng);
            break;
        }
        case Kind::StudentT: {
            std::student_t_distribution<double> dist(df);
            for (auto& x : xs) x = dist(rng);
            break;
        }
    }
    return SampleSet::from_vector(xs);
}

double Generator::log_density(double x) const {
    switch (kind) {
        case Kind::Normal: return normal_log_pdf(x, mu, sigma);
        case Kind::Mixture2: {
            const double a = std::log(weight) + normal_log_pdf(x, mu1, sigma1);
            const double b = std::log(1.0 - weight) + normal_log_pdf(x, mu2, sigma2);
            const double m = std::max(a, b);
            return m + std::log(std::exp(a - m) + std::exp(b - m));
        }
        case Kind::StudentT: {
            return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                   0.5 * std::log(df * std::numbers::pi) -
                   0.5 * (df + 1.0) * std::log1p(x * x / df);
        }
    }
    return 0.0;
}

std::optional<std::vector<double>> Generator::true_moments() const {
    switch (kind) {
        case Kind::Normal: return std::vector<double>{mu, mu * mu + sigma * sigma};
        case Kind::Mixture2: {
            const double m1 = weight * mu1 + (1.0 - weight) * mu2;
            const double m2 = weight * (mu1 * mu1 + sigma1 * sigma1) +
                              (1.0 - weight) * (mu2 * mu2 + sigma2 * sigma2);
            return std::vector<double>{m1, m2};
        }
        case Kind::StudentT:
            if (df > 2.0) return std::vector<double>{0.0, df / (df - 2.0)};
            return std::nullopt;
    }
    return std::nullopt;
}

void ExperimentSpec::validate() const {
    if (n_grid.empty()) throw InputError("experiment: need at least one sample size");
    if (seeds.empty()) throw InputError("experiment: need at least one seed");
    if (methods.empty()) throw InputError("experiment: need at least one method");
    if (!fixed_h && h_grid.empty())
        throw InputError("experiment: need a bandwidth grid when no fixed h is given");
    if (eval_n == 0) throw InputError("experiment: need a positive held-out sample size");
    for (const auto& m : methods)
        if (m != "NPG" && m != "NPG-lgN" && m != "CNPG" && m != "KDE" && m != "MLE")
            throw InputError("experiment: unknown method " + m);
}

namespace {

double mean_log_density_under(const std::function<double(double)>& log_f, const SampleSet& eval) {
    double acc = 0.0;
    for (std::size_t i = 0; i < eval.size(); ++i) acc += log_f(eval.scalar(i));
    return acc / static_cast<double>(eval.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    if (v.size() % 2) return v[m];
    return 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

DensityResults run_density_experiment(const ExperimentSpec& spec) {
    spec.validate();
    DensityResults results;
    const std::string gen_name = spec.generator.name();

    for (std::size_t n : spec.n_grid) {
        for (std::uint64_t seed : spec.seeds) {
            const SampleSet train = spec.generator.draw(n, seed);
            const SampleSet eval = spec.generator.draw(spec.eval_n, seed ^ 0xD1B54A32D192ED03ull);

            double h = 0.0;
            std::string h_error;
            if (spec.fixed_h) {
                h = *spec.fixed_h;
            } else {
                try {
                    h = cv_bandwidth(train, KernelFamily::Gaussian, spec.h_grid, spec.cv_folds).h;
                } catch (const std::runtime_error& e) {
                    h_error = e.what();
                }
            }

            // One support shared by every method in this cell; it covers both
            // splits so held-out points never fall off the box.
            std::vector<double> lo = train.min(), hi = train.max();
            const auto elo = eval.min(), ehi = eval.max();
            lo[0] = std::min(lo[0], elo[0]);
            hi[0] = std::max(hi[0], ehi[0]);
            const double margin = std::max(1.0, 3.0 * (h > 0.0 ? h : 1.0));
            const Support support = Support::interval(lo[0] - margin, hi[0] + margin);

            for (const auto& method : spec.methods) {
                DensityCell cell;
                cell.generator = gen_name;
                cell.n = n;
                cell.seed = seed;
                cell.method = method;
                cell.h = h;
                const bool needs_h = method != "MLE";
                if (needs_h && !h_error.empty()) {
                    cell.error = h_error;
                    results.cells.push_back(cell);
                    continue;
                }
                try {
                    const auto stats = StatisticSet::gaussian_1d();
                    if (method == "NPG" || method == "NPG-lgN" || method == "CNPG") {
                        const auto kernel = KernelSpec::gaussian(h, 1);
                        BetaSchedule sched = spec.schedule;
                        if (method == "NPG-lgN") sched.kind = BetaKind::InvLogN;
                        NpExpModel model;
                        if (method == "CNPG") {
                            const auto target = spec.generator.true_moments();
                            if (!target)
                                throw InputError(
                                    "constrained fit needs finite generator moments");
                            model = fit_with_target_moments(train, stats, support, kernel, sched,
                                                            *target);
                        } else {
                            model = fit(train, stats, support, kernel, sched);
                        }
                        cell.held_out_ll = model.mean_log_density(eval);
                        cell.nonzero = model.nonzero_count();
                    } else if (method == "KDE") {
                        const KdeModel model(train, KernelSpec::gaussian(h, 1));
                        cell.held_out_ll = mean_log_density_under(
                            [&](double x) {
                                const double d = kde_density(model, std::span(&x, 1));
                                return std::log(d);
                            },
                            eval);
                        cell.nonzero = static_cast<int>(n);
                    } else {  // MLE
                        const auto model = fit_mle(stats, support, train);
                        cell.held_out_ll = mean_log_density_under(
                            [&](double x) { return model.log_density(std::span(&x, 1)); }, eval);
                        cell.nonzero = 0;
                    }
                } catch (const std::runtime_error& e) {
                    cell.error = e.what();
                }
                results.cells.push_back(cell);
            }
        }
    }
    return results;
}

void DensityResults::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write results: " + path);
    out << "generator,n,seed,method,h,held_out_ll,nonzero,error\n";
    for (const auto& c : cells) {
        out << c.generator << ',' << c.n << ',' << c.seed << ',' << c.method << ',' << fmt(c.h)
            << ',' << (c.error.empty() ? fmt(c.held_out_ll) : "") << ',' << c.nonzero << ','
            << c.error << '\n';
    }
}

DensityResults DensityResults::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open results: " + path);
    DensityResults results;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line.rfind("generator,", 0) == 0) continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        // An empty trailing error field is dropped by getline.
        if (fields.size() != 7 && fields.size() != 8)
            throw InputError("bad results row: " + line);
        DensityCell c;
        c.generator = fields[0];
        try {
            c.n = std::stoull(fields[1]);
            c.seed = std::stoull(fields[2]);
            c.method = fields[3];
            c.h = std::stod(fields[4]);
            if (!fields[5].empty()) c.held_out_ll = std::stod(fields[5]);
            c.nonzero = std::stoi(fields[6]);
            if (fields.size() == 8) c.error = fields[7];
        } catch (const std::exception&) {
            throw InputError("bad results row: " + line);
        }
        results.cells.push_back(c);
    }
    return results;
}

double DensityResults::median_ll(std::size_t n, const std::string& method) const {
    std::vector<double> v;
    for (const auto& c : cells)
        if (c.n == n && c.method == method && c.error.empty()) v.push_back(c.held_out_ll);
    return median_of(std::move(v));
}

double DensityResults::median_nonzero(std::size_t n, const std::string& method) const {
    std::vector<double> v;
    for (const auto& c : cells)
        if (c.n == n && c.method == method && c.error.empty())
            v.push_back(static_cast<double>(c.nonzero));
    return median_of(std::move(v));
}

double DensityResults::mad_ll(std::size_t n, const std::string& method) const {
    std::vector<double> v;
    for (const auto& c : cells)
        if (c.n == n && c.method == method && c.error.empty()) v.push_back(c.held_out_ll);
    const double med = median_of(v);
    for (auto& x : v) x = std::abs(x - med);
    return median_of(std::move(v));
}

Graph g8_example_graph() {
    // Deterministic search: drop six edges from K8, first (lexicographic)
    // subset that lands on 22 edges and 29 triangles.
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) all.emplace_back(i, j);
    const int m = static_cast<int>(all.size());

    int pick[6];
    for (pick[0] = 0; pick[0] < m; ++pick[0])
        for (pick[1] = pick[0] + 1; pick[1] < m; ++pick[1])
            for (pick[2] = pick[1] + 1; pick[2] < m; ++pick[2])
                for (pick[3] = pick[2] + 1; pick[3] < m; ++pick[3])
                    for (pick[4] = pick[3] + 1; pick[4] < m; ++pick[4])
                        for (pick[5] = pick[4] + 1; pick[5] < m; ++pick[5]) {
                            Graph g = Graph::complete(8);
                            for (int k = 0; k < 6; ++k)
                                g.set_edge(all[pick[k]].first, all[pick[k]].second, false);
                            const GraphStats s = stats(g);
                            if (s.edges == 22 && s.triangles == 29) return g;
                        }
    throw NumericalError("no 8-node graph with 22 edges and 29 triangles found");
}

std::pair<long long, long long> mass_mode(
    const std::map<std::pair<long long, long long>, double>& mass) {
    std::pair<long long, long long> best{0, 0};
    double best_p = -1.0;
    for (const auto& [key, p] : mass)
        if (p > best_p) {
            best_p = p;
            best = key;
        }
    return best;
}

double box_mass(const std::map<std::pair<long long, long long>, double>& mass, long long ce,
                long long ct, long long re, long long rt) {
    double total = 0.0;
    for (const auto& [key, p] : mass)
        if (std::llabs(key.first - ce) <= re && std::llabs(key.second - ct) <= rt) total += p;
    return total;
}

G8Report run_g8_experiment(double h, double beta) {
    G8Report report;
    report.hist = enumerate_feature_histogram(8);
    const Graph g = g8_example_graph();
    const GraphStats obs = stats(g);
    report.ergm = exact_fit_ergm(obs, report.hist);
    report.nergm = exact_fit_nergm(g, report.hist, h, beta);

    const auto ergm_mass = exact_mass(report.ergm, report.hist);
    const auto nergm_mass = exact_mass(report.nergm, report.hist);
    report.ergm_mode = mass_mode(ergm_mass);
    report.nergm_mode = mass_mode(nergm_mass);
    report.ergm_box_mass = box_mass(ergm_mass, obs.edges, obs.triangles, 2, 5);
    report.nergm_box_mass = box_mass(nergm_mass, obs.edges, obs.triangles, 2, 5);
    for (const auto& [key, p] : ergm_mass) report.ergm_total_mass += p;
    for (const auto& [key, p] : nergm_mass) report.nergm_total_mass += p;
    return report;
}

namespace {

void write_mass_csv(const std::map<std::pair<long long, long long>, double>& mass,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write mass table: " + path);
    out << "edges,triangles,prob\n";
    for (const auto& [key, p] : mass)
        out << key.first << ',' << key.second << ',' << fmt(p) << '\n';
}

}  // namespace

void write_g8_report(const G8Report& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    write_mass_csv(exact_mass(report.ergm, report.hist), (dir / "ergm_mass.csv").string());
    write_mass_csv(exact_mass(report.nergm, report.hist), (dir / "nergm_mass.csv").string());

    nlohmann::json j;
    j["ergm"] = nlohmann::json::parse(report.ergm.to_json());
    j["nergm"] = nlohmann::json::parse(report.nergm.to_json());
    j["ergm_mode"] = {report.ergm_mode.first, report.ergm_mode.second};
    j["nergm_mode"] = {report.nergm_mode.first, report.nergm_mode.second};
    j["ergm_box_mass"] = report.ergm_box_mass;
    j["nergm_box_mass"] = report.nergm_box_mass;
    std::ofstream out(dir / "summary.json");
    if (!out) throw InputError("cannot write summary: " + out_dir);
    out << j.dump(2) << '\n';
}

void emit_plot_data(const DensityResults& results, const std::string& kind,
                    const std::string& path) {
    std::vector<std::pair<std::size_t, std::string>> keys;
    for (const auto& c : results.cells) {
        const std::pair<std::size_t, std::string> k{c.n, c.method};
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());

    std::ofstream out(path);
    if (!out) throw InputError("cannot write plot data: " + path);
    const std::string gen = results.cells.empty() ? "" : results.cells.front().generator;
    if (kind == "ll-vs-n") {
        out << "generator,n,method,median_ll,mad\n";
        for (const auto& [n, method] : keys)
            out << gen << ',' << n << ',' << method << ',' << fmt(results.median_ll(n, method))
                << ',' << fmt(results.mad_ll(n, method)) << '\n';
    } else if (kind == "nonzero-vs-n") {
        out << "generator,n,method,median_nonzero\n";
        for (const auto& [n, method] : keys)
            out << gen << ',' << n << ',' << method << ','
                << fmt(results.median_nonzero(n, method)) << '\n';
    } else {
        throw InputError("unknown plot kind: " + kind);
    }
}

void emit_density_curve(const std::vector<std::pair<std::string, NpExpModel>>& models, double lo,
                        double hi, int points, const std::string& path) {
    if (models.empty()) throw InputError("density curve: need at least one model");
    if (points < 2) throw InputError("density curve: need at least two grid points");
    if (!(hi > lo)) throw InputError("density curve: empty grid interval");
    std::ofstream out(path);
    if (!out) throw InputError("cannot write plot data: " + path);
    out << "x,method,density\n";
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        for (const auto& [label, model] : models)
            out << fmt(x) << ',' << label << ','
                << fmt(std::exp(model.log_density(std::span(&x, 1)))) << '\n';
    }
}

}  // namespace npef
