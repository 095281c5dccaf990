#include "cns/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

namespace cns::graph {

std::string to_string(DistanceMetric metric) {
    return metric == DistanceMetric::euclidean ? "euclidean" : "cosine";
}

DistanceMetric metric_from_string(const std::string& name) {
    if (name == "euclidean") return DistanceMetric::euclidean;
    if (name == "cosine") return DistanceMetric::cosine;
    throw config_error("unknown metric '" + name + "' (expected euclidean or cosine)");
}

namespace {

void check_cosine_norms(const DataMatrix& data) {
    for (Index i = 0; i < data.n(); ++i)
        if (data.values.row(i).norm() == 0)
            throw data_error("cosine metric: row " + std::to_string(i) + " has zero norm");
}

// Distances from one query point to all points; squared for euclidean (the
// ordering is what matters), 1 - cosine similarity for cosine.
Vector distances_from(const Matrix& X, const Vector& inv_norms, Index q, DistanceMetric metric) {
    if (metric == DistanceMetric::euclidean)
        return (X.rowwise() - X.row(q)).rowwise().squaredNorm();
    Vector sims = (X * X.row(q).transpose()) * inv_norms[q];
    return Vector::Ones(X.rows()) - sims.cwiseProduct(inv_norms);
}

std::vector<Index> nearest_k(const Vector& dist, Index q, Index k) {
    const Index n = dist.size();
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(n - 1));
    for (Index i = 0; i < n; ++i)
        if (i != q) order.push_back(i);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

void parallel_rows(Index n, const std::function<void(Index, Index)>& work) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw < 2 || n < 256) {
        work(0, n);
        return;
    }
    const Index chunks = std::min<Index>(static_cast<Index>(hw), n);
    std::vector<std::thread> pool;
    for (Index c = 0; c < chunks; ++c) {
        Index begin = n * c / chunks;
        Index end = n * (c + 1) / chunks;
        pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
}

}  // namespace

Scalar distance(const DataMatrix& data, Index i, Index j, DistanceMetric metric) {
    if (metric == DistanceMetric::euclidean)
        return (data.values.row(i) - data.values.row(j)).norm();
    const Scalar ni = data.values.row(i).norm();
    const Scalar nj = data.values.row(j).norm();
    if (ni == 0 || nj == 0) throw data_error("cosine distance undefined for zero-norm row");
    return 1.0 - data.values.row(i).dot(data.values.row(j)) / (ni * nj);
}

std::vector<Index> knn_indices(const DataMatrix& data, Index query_row, Index k,
                               DistanceMetric metric) {
    data.validate();
    const Index n = data.n();
    if (k < 1 || k > n - 1) throw config_error("k must lie in [1, n-1]");
    if (query_row < 0 || query_row >= n) throw config_error("query row out of range");
    Vector inv_norms;
    if (metric == DistanceMetric::cosine) {
        check_cosine_norms(data);
        inv_norms = data.values.rowwise().norm().cwiseInverse();
    }
    Vector dist = distances_from(data.values, inv_norms, query_row, metric);
    return nearest_k(dist, query_row, k);
}

TransitionMatrix build_knn_graph(const DataMatrix& data, Index k, DistanceMetric metric) {
    data.validate();
    const Index n = data.n();
    if (k < 1) throw config_error("k must be positive");
    if (k >= n) throw config_error("k = " + std::to_string(k) + " requires n > k (n = " +
                                   std::to_string(n) + ")");
    Vector inv_norms;
    if (metric == DistanceMetric::cosine) {
        check_cosine_norms(data);
        inv_norms = data.values.rowwise().norm().cwiseInverse();
    }

    TransitionMatrix W;
    W.n = n;
    W.k = k;
    W.rows.resize(n, k);

    parallel_rows(n, [&](Index begin, Index end) {
        for (Index q = begin; q < end; ++q) {
            Vector dist = distances_from(data.values, inv_norms, q, metric);
            auto nbrs = nearest_k(dist, q, k);
            std::sort(nbrs.begin(), nbrs.end());
            for (Index c = 0; c < k; ++c) W.rows(q, c) = nbrs[static_cast<std::size_t>(c)];
        }
    });

    W.refresh_col_l1();
    return W;
}

void TransitionMatrix::refresh_col_l1() {
    col_l1 = Vector::Zero(n);
    const Scalar w = 1.0 / static_cast<Scalar>(k);
    for (Index i = 0; i < n; ++i)
        for (Index c = 0; c < k; ++c) col_l1[rows(i, c)] += w;
}

Matrix TransitionMatrix::multiply(const Matrix& F) const {
    Matrix out = Matrix::Zero(n, F.cols());
    for (Index i = 0; i < n; ++i)
        for (Index c = 0; c < k; ++c) out.row(i) += F.row(rows(i, c));
    out /= static_cast<Scalar>(k);
    return out;
}

Matrix TransitionMatrix::multiply_transposed(const Matrix& F) const {
    Matrix out = Matrix::Zero(n, F.cols());
    for (Index i = 0; i < n; ++i)
        for (Index c = 0; c < k; ++c) out.row(rows(i, c)) += F.row(i);
    out /= static_cast<Scalar>(k);
    return out;
}

std::string TransitionMatrix::dump_coordinates() const {
    std::ostringstream ss;
    const Scalar w = 1.0 / static_cast<Scalar>(k);
    for (Index i = 0; i < n; ++i)
        for (Index c = 0; c < k; ++c) ss << i << ' ' << rows(i, c) << ' ' << w << '\n';
    return ss.str();
}

}  // namespace cns::graph
