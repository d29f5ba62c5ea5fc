#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace okbnb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Index sets (supports, select/avoid constraints) are kept sorted and unique.
using IndexSet = std::vector<int>;

struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularSystem : std::runtime_error {
    explicit SingularSystem(const std::string& msg) : std::runtime_error(msg) {}
};

struct InfeasibleConfig : std::runtime_error {
    explicit InfeasibleConfig(const std::string& msg) : std::runtime_error(msg) {}
};

inline bool contains(const IndexSet& s, int j) {
    return std::binary_search(s.begin(), s.end(), j);
}

inline IndexSet sorted_unique(IndexSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

inline IndexSet set_union(const IndexSet& a, int j) {
    IndexSet out = a;
    auto it = std::lower_bound(out.begin(), out.end(), j);
    if (it == out.end() || *it != j) out.insert(it, j);
    return out;
}

}  // namespace okbnb
