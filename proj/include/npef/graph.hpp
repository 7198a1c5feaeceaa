#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace npef {

struct GraphStats {
    long long edges = 0;
    long long triangles = 0;

    friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

// Undirected simple graph on n labeled vertices, adjacency as a bit matrix.
class Graph {
public:
    explicit Graph(int n);

    int n() const { return n_; }
    bool has_edge(int i, int j) const;
    void set_edge(int i, int j, bool present);
    void toggle(int i, int j);

    // Number of common neighbors of i and j (excluding i and j themselves).
    int common_neighbors(int i, int j) const;

    long long edge_count() const;
    static Graph complete(int n);

    // Raw adjacency words, usable as a hash key.
    const std::vector<std::uint64_t>& bits() const { return rows_; }
    long long hamming_distance(const Graph& other) const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    void check_pair(int i, int j) const;
    int n_;
    int words_per_row_;
    std::vector<std::uint64_t> rows_;
};

GraphStats stats(const Graph& g);

// Stat change from toggling edge (i,j): (+-1 edges, +-common neighbors).
GraphStats flip_delta(const Graph& g, int i, int j);

// Exact counts of labeled graphs per (edge, triangle) tuple.
struct FeatureHistogram {
    int n = 0;
    std::map<std::pair<long long, long long>, std::uint64_t> counts;

    std::uint64_t total() const;
    void write_csv(const std::string& path) const;
    static FeatureHistogram read_csv(const std::string& path);
};

// Gray-code walk over all 2^{C(n,2)} labeled graphs; n <= 8.
FeatureHistogram enumerate_feature_histogram(int n);

struct GofReport {
    std::vector<double> degree_dist;    // D_0 .. D_{n-1}
    std::vector<double> esp_dist;       // EP_0 .. EP_{n-2}
    std::vector<double> geodesic_dist;  // MGD_1 .. MGD_{n-1}
    double unreachable_fraction = 0.0;  // over all node pairs

    std::string to_json() const;
    void write_csv(const std::string& path) const;
};

GofReport gof(const Graph& g);

// "u v" integer pairs, 0-indexed; duplicates and reversed pairs tolerated.
// n = 0 infers the node count as max index + 1.
Graph read_edge_list(const std::string& path, int n = 0);
void write_edge_list(const Graph& g, const std::string& path);

}  // namespace npef
