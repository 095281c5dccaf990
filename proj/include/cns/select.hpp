#pragma once

#include <string>
#include <vector>

#include "cns/chain.hpp"
#include "cns/graph.hpp"
#include "cns/types.hpp"

namespace cns::select {

/// Local maxima of the transition-matrix column L1 norms, optionally truncated
/// to the cap by a magnitude-times-separation score.
struct CandidateSet {
    std::vector<Index> indices;
    std::vector<Scalar> scores;
    bool capped = false;
};

/// Greedy-selection statistics over the candidate resolvent columns: s holds
/// column sums, c holds pairwise inner products with an infinite diagonal.
struct SelectionScores {
    Vector s;
    Matrix c;
};

struct ModelConfig {
    Scalar lambda = 0;
    Index k = 0;
    Index K = 0;
    graph::DistanceMetric metric = graph::DistanceMetric::euclidean;
    std::vector<Index> selected;
};

struct CriterionReport {
    Scalar C = 0;
    Scalar R = 0;
    Scalar score = 0;
    Scalar mean_final_max = 0;
    Scalar initial_reference = 0;
};

struct ClusterResult {
    LabelVector labels;
    SoftAssignment soft;
    ModelConfig config;
    CriterionReport report;
    int effective_clusters = 0;
    std::vector<std::string> warnings;
};

/// One row of the model-selection table.
struct CriterionRow {
    graph::DistanceMetric metric;
    Index k;
    Scalar lambda;
    Index K;
    Scalar C;
    Scalar R;
    Scalar score;
    int effective_clusters;
};

CandidateSet candidate_set(const graph::TransitionMatrix& W, const DataMatrix& data, Index k,
                           graph::DistanceMetric metric, Index cap = 300);

SelectionScores selection_scores(const std::vector<chain::ResolventColumn>& columns);

/// Greedy pick of K informative points: first by largest column magnitude,
/// then repeatedly the candidate minimizing max similarity (scaled by 1/s^2)
/// to those already chosen. Returns candidate-set positions mapped back to
/// data indices, in selection order.
std::vector<Index> select_informative(const SelectionScores& scores,
                                      const CandidateSet& candidates, Index K);

/// Clarity improvement C, idealized reference R, and their ratio.
CriterionReport criterion(const SoftAssignment& F_inf, Scalar lambda, Index k, Index n, Index K);

struct IdealizedRows {
    Vector member;
    Vector informative;
};

/// Closed-form limit rows under the perfectly clusterable scenario.
IdealizedRows idealized_limits(Scalar lambda, Index k, Index K);

/// Clarity improvement under the idealized scenario for a specific K.
Scalar idealized_improvement(Scalar lambda, Index k, Index K, Index n);

/// Reference value R(lambda, k): the idealized improvement maximized over K.
Scalar reference_value(Scalar lambda, Index k, Index n);

struct GridSearchResult {
    ModelConfig best;
    ClusterResult result;
    std::vector<CriterionRow> table;
};

struct GridSpec {
    std::vector<Index> k_grid;       // empty selects the default log(n) grid
    std::vector<Scalar> lambda_grid; // empty selects the default n^{-1/2} grid
    Index K_max = 30;
    Index cap = 300;
    Scalar tol = 1e-10;
};

/// Default grids: k in {1,2,3,4} * floor(log n) clamped to [1, n-1] and
/// deduplicated; lambda in {1,...,5} * n^{-1/2} with entries >= 1 discarded.
std::vector<Index> default_k_grid(Index n);
std::vector<Scalar> default_lambda_grid(Index n);

/// Full automatic model selection: for every (k, lambda) builds the graph,
/// solves candidate resolvent columns once, sweeps K, and returns the
/// configuration maximizing C/R (ties to smaller K, then larger k, then
/// larger lambda). The table is sorted by (k, lambda, K).
GridSearchResult grid_search(const DataMatrix& data, graph::DistanceMetric metric,
                             const GridSpec& spec = {});

}  // namespace cns::select
