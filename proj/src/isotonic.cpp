#include "okbnb/isotonic.hpp"

#include <stdexcept>

namespace okbnb {

std::vector<double> solve_isotonic(const IsotonicInstance& inst) {
    const size_t m = inst.order.size();
    if (inst.weights.size() != m || inst.targets.size() != m)
        throw std::invalid_argument("solve_isotonic: size mismatch");

    struct Block {
        double wsum;
        double wtarget;  // sum of w_j * b_j
        size_t count;
        double value() const { return wtarget / wsum; }
    };
    std::vector<Block> stack;
    stack.reserve(m);

    for (size_t pos = 0; pos < m; ++pos) {
        int j = inst.order[pos];
        double w = inst.weights[j];
        if (!(w > 0.0)) throw std::invalid_argument("solve_isotonic: weights must be > 0");
        Block blk{w, w * inst.targets[j], 1};
        // Along `order` the fit must be nonincreasing; merge while the new
        // block would rise above its predecessor.
        while (!stack.empty() && stack.back().value() < blk.value()) {
            blk.wsum += stack.back().wsum;
            blk.wtarget += stack.back().wtarget;
            blk.count += stack.back().count;
            stack.pop_back();
        }
        stack.push_back(blk);
    }

    std::vector<double> v(m);
    size_t pos = 0;
    for (const Block& blk : stack) {
        double val = blk.value();
        for (size_t i = 0; i < blk.count; ++i) v[inst.order[pos++]] = val;
    }
    return v;
}

}  // namespace okbnb
