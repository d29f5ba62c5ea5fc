#pragma once

#include "okbnb/beam.hpp"
#include "okbnb/bounds.hpp"

namespace okbnb {

struct Node {
    IndexSet select;
    IndexSet avoid;
    int depth = 0;          // |select| + |avoid|
    double lower = 0.0;     // bound recorded when the node was processed
};

// Optimal: a certificate with relative gap <= gap_tol was produced (this
// includes draining the queue, which forces the gap to zero). GapReached is
// reserved for externally budgeted stops and is not emitted by this driver.
enum class BnBStatus { Optimal, GapReached, TimeLimit, QueueExhausted };

const char* to_string(BnBStatus s);

struct BnBResult {
    SparseSolution best;
    double upper = 0.0;
    double lower = 0.0;
    double gap = 0.0;
    long nodes_processed = 0;
    long nodes_pruned = 0;
    double elapsed_s = 0.0;
    BnBStatus status = BnBStatus::Optimal;
};

// Coordinate whose removal from sol's support hurts the loss most, among
// coordinates not already forced in; evaluated in closed form from the
// fitted coefficients. Ties go to the lowest index.
int branch_coordinate(const ProblemData& pd, const SolverConfig& cfg,
                      const SparseSolution& sol, const IndexSet& select);

// Best-first-by-FIFO branch and bound over (select, avoid) nodes. Bounds
// come from fast_lower_bound, tightened by ADMM when it survives the first
// prune test; incumbents come from beam search with a support cache shared
// across all nodes. The certified lower bound is maintained per depth level:
// once every node of the shallowest unfinished depth is solved, the global
// bound advances to the best per-depth minimum seen so far.
BnBResult solve(const ProblemData& pd, const SolverConfig& cfg,
                SupportCache* shared_cache = nullptr);

}  // namespace okbnb
