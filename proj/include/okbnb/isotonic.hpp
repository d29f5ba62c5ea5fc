#pragma once

#include <vector>

namespace okbnb {

// Weighted isotonic regression instance. `order` lists coordinate indices from
// the one that must take the largest fitted value down to the smallest, i.e.
// the fit v minimizes sum_j w_j (v_j - b_j)^2 subject to
// v[order[0]] >= v[order[1]] >= ... >= v[order[m-1]].
struct IsotonicInstance {
    std::vector<int> order;
    std::vector<double> weights;  // > 0, indexed by coordinate
    std::vector<double> targets;  // indexed by coordinate
};

// Pool-adjacent-violators with a block stack; O(m) after the given order.
// Returns the fitted values in coordinate (not order) indexing.
std::vector<double> solve_isotonic(const IsotonicInstance& inst);

}  // namespace okbnb
