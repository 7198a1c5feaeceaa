#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace npef {

// n x d matrix of real observations, row-major.
class SampleSet {
public:
    SampleSet() = default;
    SampleSet(int dim, std::vector<double> data);

    // 1-D convenience.
    static SampleSet from_vector(const std::vector<double>& xs);

    int dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    bool empty() const { return data_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    double scalar(std::size_t i) const { return data_[i * dim_]; }
    const std::vector<double>& data() const { return data_; }

    void push_row(std::span<const double> x);

    // Componentwise bounds over all rows.
    std::vector<double> min() const;
    std::vector<double> max() const;

    // One row per observation, comma-separated columns, optional header.
    static SampleSet read_csv(const std::string& path);
    void write_csv(const std::string& path) const;

private:
    int dim_ = 0;
    std::vector<double> data_;
};

}  // namespace npef
