#include "npef/samples.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "npef/errors.hpp"

namespace npef {

SampleSet::SampleSet(int dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
    if (dim_ <= 0) throw InputError("SampleSet: dim must be positive");
    if (data_.size() % dim_ != 0) throw InputError("SampleSet: data length not a multiple of dim");
}

SampleSet SampleSet::from_vector(const std::vector<double>& xs) {
    return SampleSet(1, xs);
}

void SampleSet::push_row(std::span<const double> x) {
    if (dim_ == 0) dim_ = static_cast<int>(x.size());
    if (static_cast<int>(x.size()) != dim_) throw InputError("SampleSet: row dimension mismatch");
    data_.insert(data_.end(), x.begin(), x.end());
}

std::vector<double> SampleSet::min() const {
    std::vector<double> m(dim_, 0.0);
    for (int j = 0; j < dim_; ++j) {
        m[j] = data_[j];
        for (std::size_t i = 1; i < size(); ++i) m[j] = std::min(m[j], data_[i * dim_ + j]);
    }
    return m;
}

std::vector<double> SampleSet::max() const {
    std::vector<double> m(dim_, 0.0);
    for (int j = 0; j < dim_; ++j) {
        m[j] = data_[j];
        for (std::size_t i = 1; i < size(); ++i) m[j] = std::max(m[j], data_[i * dim_ + j]);
    }
    return m;
}

namespace {

bool looks_numeric(const std::string& field) {
    char* end = nullptr;
    std::string trimmed = field;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty()) return false;
    std::strtod(trimmed.c_str(), &end);
    while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
    return end && *end == '\0';
}

}  // namespace

SampleSet SampleSet::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open sample file: " + path);
    SampleSet out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        bool numeric = true;
        while (std::getline(ss, field, ',')) {
            if (!looks_numeric(field)) {
                numeric = false;
                break;
            }
            row.push_back(std::stod(field));
        }
        if (!numeric) {
            if (first) {
                first = false;  // header row
                continue;
            }
            throw InputError("non-numeric field in " + path + ": " + line);
        }
        first = false;
        out.push_row(row);
    }
    if (out.empty()) throw InputError("no observations in " + path);
    return out;
}

void SampleSet::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write sample file: " + path);
    out.precision(17);
    for (std::size_t i = 0; i < size(); ++i) {
        for (int j = 0; j < dim_; ++j) {
            if (j) out << ',';
            out << data_[i * dim_ + j];
        }
        out << '\n';
    }
}

}  // namespace npef
