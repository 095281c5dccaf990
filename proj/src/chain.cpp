#include "cns/chain.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <set>

namespace cns::chain {

namespace {

void check_lambda(Scalar lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw config_error("lambda must lie in (0, 1)");
}

void check_selected(Index n, const std::vector<Index>& selected) {
    if (selected.empty()) throw config_error("selection must contain at least one index");
    std::set<Index> seen;
    for (Index j : selected) {
        if (j < 0 || j >= n) throw config_error("selected index out of range");
        if (!seen.insert(j).second)
            throw config_error("duplicate selected index " + std::to_string(j));
    }
}

Vector residual(const graph::TransitionMatrix& W, Scalar lambda, const Vector& x, Index j) {
    Vector r = x - (1.0 - lambda) * W.multiply(x);
    r[j] -= 1.0;
    return r;
}

// Fixed-point refinement x <- (1-lambda) W x + e_j; contraction factor 1-lambda.
void refine_fixed_point(const graph::TransitionMatrix& W, Scalar lambda, Index j, Scalar tol,
                        Vector& x) {
    const int budget =
        static_cast<int>(std::ceil(std::log(tol * lambda) / std::log1p(-lambda))) + 50;
    for (int t = 0; t < budget; ++t) {
        x = (1.0 - lambda) * W.multiply(x);
        x[j] += 1.0;
        if (t % 16 == 15 && residual(W, lambda, x, j).cwiseAbs().maxCoeff() <= tol) return;
    }
    const Scalar achieved = residual(W, lambda, x, j).cwiseAbs().maxCoeff();
    if (achieved > tol)
        throw solver_error("resolvent solve for column " + std::to_string(j) +
                           " stalled at residual " + std::to_string(achieved));
}

Eigen::SparseMatrix<Scalar> system_matrix(const graph::TransitionMatrix& W, Scalar lambda) {
    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(static_cast<std::size_t>(W.n * (W.k + 1)));
    const Scalar off = -(1.0 - lambda) / static_cast<Scalar>(W.k);
    for (Index i = 0; i < W.n; ++i) {
        trips.emplace_back(i, i, 1.0);
        for (Index c = 0; c < W.k; ++c) trips.emplace_back(i, W.rows(i, c), off);
    }
    Eigen::SparseMatrix<Scalar> M(W.n, W.n);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

}  // namespace

ResolventColumn solve_resolvent_column(const graph::TransitionMatrix& W, Scalar lambda, Index j,
                                       Scalar tol) {
    check_lambda(lambda);
    if (j < 0 || j >= W.n) throw config_error("column index out of range");
    if (!(tol > 0)) throw config_error("tolerance must be positive");

    Vector x = Vector::Zero(W.n);
    x[j] = 1.0;
    refine_fixed_point(W, lambda, j, tol, x);
    return ResolventColumn{j, lambda, std::move(x)};
}

std::vector<ResolventColumn> solve_resolvent_columns(const graph::TransitionMatrix& W,
                                                     Scalar lambda,
                                                     const std::vector<Index>& columns,
                                                     Scalar tol) {
    check_lambda(lambda);
    if (!(tol > 0)) throw config_error("tolerance must be positive");
    for (Index j : columns)
        if (j < 0 || j >= W.n) throw config_error("column index out of range");

    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
    lu.compute(system_matrix(W, lambda));
    if (lu.info() != Eigen::Success) throw solver_error("sparse LU factorization failed");

    std::vector<ResolventColumn> out;
    out.reserve(columns.size());
    for (Index j : columns) {
        Vector e = Vector::Zero(W.n);
        e[j] = 1.0;
        Vector x = lu.solve(e);
        if (residual(W, lambda, x, j).cwiseAbs().maxCoeff() > tol)
            refine_fixed_point(W, lambda, j, tol, x);
        out.push_back(ResolventColumn{j, lambda, std::move(x)});
    }
    return out;
}

SoftAssignment build_initial_assignment(Index n, const std::vector<Index>& selected) {
    check_selected(n, selected);
    const Index K = static_cast<Index>(selected.size());
    SoftAssignment F0;
    F0.values = Matrix::Constant(n, K, 1.0 / static_cast<Scalar>(K));
    for (Index j = 0; j < K; ++j) {
        F0.values.row(selected[static_cast<std::size_t>(j)]).setZero();
        F0.values(selected[static_cast<std::size_t>(j)], j) = 1.0;
    }
    return F0;
}

SoftAssignment final_solution(const graph::TransitionMatrix& W, Scalar lambda,
                              const std::vector<Index>& selected,
                              const std::vector<ResolventColumn>& columns) {
    check_lambda(lambda);
    check_selected(W.n, selected);
    if (columns.size() != selected.size())
        throw config_error("column count does not match selection");
    for (std::size_t j = 0; j < selected.size(); ++j) {
        if (columns[j].index != selected[j])
            throw config_error("resolvent column order does not match selection");
        if (columns[j].lambda != lambda)
            throw config_error("resolvent column lambda mismatch");
    }

    const Index n = W.n;
    const Index K = static_cast<Index>(selected.size());
    Matrix R(n, K);
    for (Index j = 0; j < K; ++j) R.col(j) = columns[static_cast<std::size_t>(j)].values;

    Vector row_mean = R.rowwise().sum() / static_cast<Scalar>(K);
    Matrix F = Matrix::Constant(n, K, 1.0 / static_cast<Scalar>(K)) + lambda * R;
    F.colwise() -= lambda * row_mean;

    for (Index i = 0; i < n; ++i) {
        if (std::abs(F.row(i).sum() - 1.0) > 1e-9)
            throw solver_error("final solution row " + std::to_string(i) +
                               " violates the row-sum check; tighten the solver tolerance");
        for (Index j = 0; j < K; ++j) {
            if (F(i, j) < 0) {
                if (F(i, j) < -1e-12)
                    throw solver_error("final solution entry below -1e-12; solver failure");
                F(i, j) = 0;
            }
        }
    }
    return SoftAssignment{std::move(F)};
}

SoftAssignment iterate_smoothing(const graph::TransitionMatrix& W, Scalar lambda,
                                 const SoftAssignment& F0, int t_max, Scalar tol) {
    check_lambda(lambda);
    F0.validate();
    if (F0.n() != W.n) throw config_error("initial assignment size mismatch");

    Matrix F = F0.values;
    for (int t = 0; t < t_max; ++t) {
        Matrix next = (1.0 - lambda) * W.multiply(F) + lambda * F0.values;
        const Scalar change = (next - F).cwiseAbs().maxCoeff();
        F = std::move(next);
        if (change <= tol) break;
    }
    return SoftAssignment{std::move(F)};
}

HardLabels hard_labels(const SoftAssignment& F) {
    F.validate();
    HardLabels out;
    out.labels.groups = static_cast<int>(F.K());
    std::set<int> distinct;
    for (Index i = 0; i < F.n(); ++i) {
        Index best = 0;
        for (Index j = 1; j < F.K(); ++j)
            if (F.values(i, j) > F.values(i, best)) best = j;
        out.labels.labels.push_back(static_cast<int>(best));
        distinct.insert(static_cast<int>(best));
    }
    out.effective_clusters = static_cast<int>(distinct.size());
    return out;
}

}  // namespace cns::chain
