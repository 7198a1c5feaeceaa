#include "npef/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "npef/errors.hpp"

namespace npef {

Graph::Graph(int n) : n_(n) {
    if (n < 1) throw InputError("Graph: need at least one node");
    words_per_row_ = (n + 63) / 64;
    rows_.assign(static_cast<std::size_t>(n) * words_per_row_, 0);
}

void Graph::check_pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw InputError("Graph: node index out of range");
    if (i == j) throw InputError("Graph: self-loops are not allowed");
}

bool Graph::has_edge(int i, int j) const {
    check_pair(i, j);
    return (rows_[static_cast<std::size_t>(i) * words_per_row_ + j / 64] >> (j % 64)) & 1u;
}

void Graph::set_edge(int i, int j, bool present) {
    check_pair(i, j);
    const std::uint64_t bi = 1ull << (j % 64);
    const std::uint64_t bj = 1ull << (i % 64);
    auto& wi = rows_[static_cast<std::size_t>(i) * words_per_row_ + j / 64];
    auto& wj = rows_[static_cast<std::size_t>(j) * words_per_row_ + i / 64];
    if (present) {
        wi |= bi;
        wj |= bj;
    } else {
        wi &= ~bi;
        wj &= ~bj;
    }
}

void Graph::toggle(int i, int j) { set_edge(i, j, !has_edge(i, j)); }

int Graph::common_neighbors(int i, int j) const {
    check_pair(i, j);
    const std::uint64_t* ri = rows_.data() + static_cast<std::size_t>(i) * words_per_row_;
    const std::uint64_t* rj = rows_.data() + static_cast<std::size_t>(j) * words_per_row_;
    int count = 0;
    for (int w = 0; w < words_per_row_; ++w) count += std::popcount(ri[w] & rj[w]);
    // i and j cannot appear in the intersection: the diagonal is zero.
    return count;
}

long long Graph::edge_count() const {
    long long bits = 0;
    for (auto w : rows_) bits += std::popcount(w);
    return bits / 2;
}

Graph Graph::complete(int n) {
    Graph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.set_edge(i, j, true);
    return g;
}

long long Graph::hamming_distance(const Graph& other) const {
    if (other.n_ != n_) throw InputError("hamming_distance: node count mismatch");
    long long bits = 0;
    for (std::size_t w = 0; w < rows_.size(); ++w) bits += std::popcount(rows_[w] ^ other.rows_[w]);
    return bits / 2;
}

GraphStats stats(const Graph& g) {
    GraphStats s;
    long long tri3 = 0;
    for (int i = 0; i < g.n(); ++i)
        for (int j = i + 1; j < g.n(); ++j)
            if (g.has_edge(i, j)) {
                ++s.edges;
                tri3 += g.common_neighbors(i, j);
            }
    s.triangles = tri3 / 3;  // each triangle counted once per edge
    return s;
}

GraphStats flip_delta(const Graph& g, int i, int j) {
    const int common = g.common_neighbors(i, j);
    if (g.has_edge(i, j)) return {-1, -common};
    return {+1, +common};
}

std::uint64_t FeatureHistogram::total() const {
    std::uint64_t t = 0;
    for (const auto& [key, c] : counts) t += c;
    return t;
}

void FeatureHistogram::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write histogram: " + path);
    out << "edges,triangles,count\n";
    for (const auto& [key, c] : counts)
        out << key.first << ',' << key.second << ',' << c << '\n';
}

FeatureHistogram FeatureHistogram::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open histogram: " + path);
    FeatureHistogram hist;
    std::string line;
    long long max_edges = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("edges", 0) == 0) continue;
        long long e, t;
        std::uint64_t c;
        char c1, c2;
        std::istringstream ss(line);
        if (!(ss >> e >> c1 >> t >> c2 >> c)) throw InputError("bad histogram row: " + line);
        hist.counts[{e, t}] += c;
        max_edges = std::max(max_edges, e);
    }
    // Recover n from C(n,2) >= max edge count.
    int n = 2;
    while (static_cast<long long>(n) * (n - 1) / 2 < max_edges) ++n;
    hist.n = n;
    return hist;
}

FeatureHistogram enumerate_feature_histogram(int n) {
    if (n < 2 || n > 8)
        throw InputError("enumerate_feature_histogram: n must be in [2,8] (2^C(n,2) graphs)");
    const int m = n * (n - 1) / 2;
    std::vector<std::pair<int, int>> edge_of_bit(m);
    {
        int b = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) edge_of_bit[b++] = {i, j};
    }

    const long long e_max = m;
    const long long t_max = static_cast<long long>(n) * (n - 1) * (n - 2) / 6;
    std::vector<std::uint64_t> cells((e_max + 1) * (t_max + 1), 0);

    Graph g(n);
    long long edges = 0, triangles = 0;
    cells[0] += 1;  // the empty graph, Gray code 0

    const std::uint64_t steps = 1ull << m;
    for (std::uint64_t s = 1; s < steps; ++s) {
        const int bit = std::countr_zero(s);
        const auto [i, j] = edge_of_bit[bit];
        const GraphStats d = flip_delta(g, i, j);
        g.toggle(i, j);
        edges += d.edges;
        triangles += d.triangles;
        cells[edges * (t_max + 1) + triangles] += 1;
    }

    FeatureHistogram hist;
    hist.n = n;
    for (long long e = 0; e <= e_max; ++e)
        for (long long t = 0; t <= t_max; ++t) {
            const std::uint64_t c = cells[e * (t_max + 1) + t];
            if (c) hist.counts[{e, t}] = c;
        }
    return hist;
}

GofReport gof(const Graph& g) {
    const int n = g.n();
    GofReport report;
    report.degree_dist.assign(n, 0.0);
    report.esp_dist.assign(std::max(1, n - 1), 0.0);
    report.geodesic_dist.assign(std::max(1, n - 1), 0.0);

    std::vector<int> degree(n, 0);
    long long edges = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (g.has_edge(i, j)) {
                ++degree[i];
                ++degree[j];
                ++edges;
            }
    for (int i = 0; i < n; ++i) report.degree_dist[degree[i]] += 1.0 / n;

    if (edges > 0) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (g.has_edge(i, j))
                    report.esp_dist[g.common_neighbors(i, j)] += 1.0 / static_cast<double>(edges);
    }

    // BFS from every node; each unordered pair contributes once.
    long long connected_pairs = 0, unreachable_pairs = 0;
    std::vector<long long> dist_counts(n, 0);  // index = distance
    std::vector<int> dist(n);
    for (int src = 0; src < n; ++src) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[src] = 0;
        std::deque<int> queue{src};
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v = 0; v < n; ++v)
                if (v != u && dist[v] < 0 && g.has_edge(u, v)) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
        }
        for (int v = src + 1; v < n; ++v) {
            if (dist[v] > 0) {
                ++connected_pairs;
                ++dist_counts[dist[v]];
            } else {
                ++unreachable_pairs;
            }
        }
    }
    if (connected_pairs > 0) {
        for (int d = 1; d < n; ++d)
            report.geodesic_dist[d - 1] =
                static_cast<double>(dist_counts[d]) / static_cast<double>(connected_pairs);
    }
    const long long total_pairs = static_cast<long long>(n) * (n - 1) / 2;
    if (total_pairs > 0)
        report.unreachable_fraction =
            static_cast<double>(unreachable_pairs) / static_cast<double>(total_pairs);
    return report;
}

std::string GofReport::to_json() const {
    nlohmann::json j;
    j["degree"] = degree_dist;
    j["esp"] = esp_dist;
    j["geodesic"] = geodesic_dist;
    j["unreachable_fraction"] = unreachable_fraction;
    return j.dump();
}

void GofReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write gof report: " + path);
    out << "stat,bin,value\n";
    for (std::size_t i = 0; i < degree_dist.size(); ++i)
        out << "degree," << i << ',' << degree_dist[i] << '\n';
    for (std::size_t i = 0; i < esp_dist.size(); ++i)
        out << "esp," << i << ',' << esp_dist[i] << '\n';
    for (std::size_t i = 0; i < geodesic_dist.size(); ++i)
        out << "geodesic," << (i + 1) << ',' << geodesic_dist[i] << '\n';
    out << "geodesic,unreachable," << unreachable_fraction << '\n';
}

Graph read_edge_list(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open edge list: " + path);
    std::vector<std::pair<int, int>> edges;
    int max_index = -1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ss(line);
        int u, v;
        if (!(ss >> u >> v)) throw InputError("bad edge list line: " + line);
        if (u == v) throw InputError("self-loop in edge list: " + line);
        if (u < 0 || v < 0) throw InputError("negative node index in edge list: " + line);
        edges.emplace_back(u, v);
        max_index = std::max({max_index, u, v});
    }
    if (n == 0) n = max_index + 1;
    if (max_index >= n) throw InputError("edge list node index exceeds declared node count");
    Graph g(n);
    for (auto [u, v] : edges) g.set_edge(u, v, true);
    return g;
}

void write_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write edge list: " + path);
    for (int i = 0; i < g.n(); ++i)
        for (int j = i + 1; j < g.n(); ++j)
            if (g.has_edge(i, j)) out << i << ' ' << j << '\n';
}

}  // namespace npef
