#pragma once

#include <string>
#include <vector>

#include "cns/types.hpp"

namespace cns::graph {

enum class DistanceMetric { euclidean, cosine };

std::string to_string(DistanceMetric metric);
DistanceMetric metric_from_string(const std::string& name);

/// Sparse row-stochastic kNN transition matrix. Row i lists the k nearest
/// neighbours of point i (self excluded); every stored weight equals 1/k, so
/// only the index structure is kept explicitly.
struct TransitionMatrix {
    Index n = 0;
    Index k = 0;
    IndexMatrix rows;  // n x k neighbour indices, each row sorted ascending
    Vector col_l1;     // per-column L1 norm, equals in-degree / k

    /// Dense product W * F without materializing W. F must have n rows.
    Matrix multiply(const Matrix& F) const;

    /// Transposed product W^T * F.
    Matrix multiply_transposed(const Matrix& F) const;

    /// Recomputes col_l1 from the index structure.
    void refresh_col_l1();

    /// Coordinate-triplet text dump (row, col, weight), row-major sorted.
    std::string dump_coordinates() const;
};

/// Exact k nearest neighbours of one point, self excluded, ties broken by
/// ascending index. Returns indices sorted by (distance, index).
std::vector<Index> knn_indices(const DataMatrix& data, Index query_row, Index k,
                               DistanceMetric metric);

/// Builds the full transition matrix; equals an exhaustive all-pairs scan by
/// construction. Construction parallelizes over query rows with identical
/// output at any thread count.
TransitionMatrix build_knn_graph(const DataMatrix& data, Index k, DistanceMetric metric);

/// Pairwise distance under the configured metric.
Scalar distance(const DataMatrix& data, Index i, Index j, DistanceMetric metric);

}  // namespace cns::graph
