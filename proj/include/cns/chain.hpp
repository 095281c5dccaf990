#pragma once

#include <vector>

#include "cns/graph.hpp"
#include "cns/types.hpp"

namespace cns::chain {

/// One column of (I - (1-lambda) W)^{-1}. Entries are non-negative and the
/// diagonal entry is at least 1.
struct ResolventColumn {
    Index index = 0;
    Scalar lambda = 0;
    Vector values;
};

/// Solves (I - (1-lambda) W) x = e_j to the requested residual bound via
/// fixed-point iteration, which contracts at rate (1-lambda) in the inf-norm.
ResolventColumn solve_resolvent_column(const graph::TransitionMatrix& W, Scalar lambda, Index j,
                                       Scalar tol = 1e-10);

/// Batched solve for many columns sharing one (W, lambda). Uses a sparse LU
/// factorization of I - (1-lambda) W with a per-column residual check,
/// falling back to fixed-point refinement if a column misses the bound.
std::vector<ResolventColumn> solve_resolvent_columns(const graph::TransitionMatrix& W,
                                                     Scalar lambda,
                                                     const std::vector<Index>& columns,
                                                     Scalar tol = 1e-10);

/// Initial assignment: selected rows get indicator vectors, all others are
/// uniform over the K clusters.
SoftAssignment build_initial_assignment(Index n, const std::vector<Index>& selected);

/// Closed-form limit of the smoothing recursion, assembled from the resolvent
/// columns of the selected points. Row sums are a checked postcondition, not a
/// repair; only negatives within float noise of zero are clamped.
SoftAssignment final_solution(const graph::TransitionMatrix& W, Scalar lambda,
                              const std::vector<Index>& selected,
                              const std::vector<ResolventColumn>& columns);

/// Verification oracle: iterates F <- (1-lambda) W F + lambda F0 until the
/// max-abs change drops below tol or t_max steps elapse.
SoftAssignment iterate_smoothing(const graph::TransitionMatrix& W, Scalar lambda,
                                 const SoftAssignment& F0, int t_max, Scalar tol);

struct HardLabels {
    LabelVector labels;
    int effective_clusters = 0;
};

/// Row argmax with lowest-index tie-break.
HardLabels hard_labels(const SoftAssignment& F);

}  // namespace cns::chain
