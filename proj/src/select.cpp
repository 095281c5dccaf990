#include "cns/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cns::select {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

}  // namespace

CandidateSet candidate_set(const graph::TransitionMatrix& W, const DataMatrix& data, Index k,
                           graph::DistanceMetric metric, Index cap) {
    if (W.k != k || W.n != data.n()) throw config_error("transition matrix does not match (data, k)");
    if (cap < 1) throw config_error("cap must be positive");

    CandidateSet out;
    for (Index i = 0; i < W.n; ++i) {
        Scalar best_nbr = 0;
        for (Index c = 0; c < W.k; ++c)
            best_nbr = std::max(best_nbr, W.col_l1[W.rows(i, c)]);
        if (W.col_l1[i] >= best_nbr) out.indices.push_back(i);
    }
    // The global maximum of the column norms always qualifies.
    if (out.indices.empty()) throw std::logic_error("candidate set cannot be empty");

    const std::size_t m = out.indices.size();
    out.scores.resize(m);
    for (std::size_t a = 0; a < m; ++a) {
        Scalar min_d = kInf;
        for (std::size_t b = 0; b < m; ++b)
            if (b != a)
                min_d = std::min(min_d,
                                 graph::distance(data, out.indices[a], out.indices[b], metric));
        if (m == 1) min_d = 1.0;  // degenerate single-candidate case, score unused
        out.scores[a] = W.col_l1[out.indices[a]] * min_d;
    }

    if (static_cast<Index>(m) > cap) {
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (out.scores[a] != out.scores[b]) return out.scores[a] > out.scores[b];
            return out.indices[a] < out.indices[b];
        });
        order.resize(static_cast<std::size_t>(cap));
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return out.indices[a] < out.indices[b]; });
        CandidateSet capped;
        capped.capped = true;
        for (std::size_t pos : order) {
            capped.indices.push_back(out.indices[pos]);
            capped.scores.push_back(out.scores[pos]);
        }
        return capped;
    }
    return out;
}

SelectionScores selection_scores(const std::vector<chain::ResolventColumn>& columns) {
    if (columns.empty()) throw config_error("no resolvent columns given");
    for (const auto& c : columns)
        if (c.lambda != columns.front().lambda)
            throw config_error("resolvent columns mix different lambda values");

    const Index m = static_cast<Index>(columns.size());
    const Index n = columns.front().values.size();
    Matrix cols(n, m);
    for (Index j = 0; j < m; ++j) cols.col(j) = columns[static_cast<std::size_t>(j)].values;

    SelectionScores out;
    out.s = cols.colwise().sum();  // entries are non-negative, so sum == L1 norm
    out.c = cols.transpose() * cols;
    out.c.diagonal().setConstant(kInf);
    return out;
}

std::vector<Index> select_informative(const SelectionScores& scores,
                                      const CandidateSet& candidates, Index K) {
    const Index m = static_cast<Index>(candidates.indices.size());
    if (K < 1) throw config_error("K must be positive");
    if (K > m)
        throw config_error("K = " + std::to_string(K) + " exceeds candidate count " +
                           std::to_string(m));
    if (scores.s.size() != m) throw config_error("selection scores do not match candidate set");

    std::vector<Index> picked;  // candidate positions
    Index first = 0;
    for (Index j = 1; j < m; ++j)
        if (scores.s[j] > scores.s[first]) first = j;
    picked.push_back(first);

    while (static_cast<Index>(picked.size()) < K) {
        Index best = -1;
        Scalar best_val = kInf;
        for (Index j = 0; j < m; ++j) {
            Scalar worst = 0;
            for (Index l : picked) worst = std::max(worst, scores.c(j, l));
            const Scalar val = worst / (scores.s[j] * scores.s[j]);
            if (val < best_val) {
                best_val = val;
                best = j;
            }
        }
        picked.push_back(best);
    }

    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(K));
    for (Index pos : picked) out.push_back(candidates.indices[static_cast<std::size_t>(pos)]);
    return out;
}

CriterionReport criterion(const SoftAssignment& F_inf, Scalar lambda, Index k, Index n, Index K) {
    if (F_inf.n() != n || F_inf.K() != K) throw config_error("assignment shape mismatch");
    const Scalar R = reference_value(lambda, k, n);
    if (!(R > 0)) throw config_error("reference degenerate: R(lambda, k) <= 0");

    CriterionReport rep;
    rep.mean_final_max = F_inf.values.rowwise().maxCoeff().mean();
    rep.initial_reference = static_cast<Scalar>(n - K + K * K) /
                            (static_cast<Scalar>(n) * static_cast<Scalar>(K));
    rep.C = rep.mean_final_max - rep.initial_reference;
    rep.R = R;
    rep.score = rep.C / rep.R;
    return rep;
}

IdealizedRows idealized_limits(Scalar lambda, Index k, Index K) {
    if (!(lambda > 0 && lambda < 1) || k < 1 || K < 1)
        throw config_error("invalid idealized-limit parameters");
    const Scalar dk = static_cast<Scalar>(k);
    const Scalar dK = static_cast<Scalar>(K);
    IdealizedRows rows;
    rows.member = Vector::Constant(K, (dk - 1.0 + lambda) / (dk * dK));
    rows.member[0] += (1.0 - lambda) / dk;
    rows.informative = Vector::Constant(K, (1.0 - lambda) * (dk - 1.0) / (dk * dK));
    rows.informative[0] += (1.0 + lambda * (dk - 1.0)) / dk;
    return rows;
}

Scalar idealized_improvement(Scalar lambda, Index k, Index K, Index n) {
    const Scalar dn = static_cast<Scalar>(n);
    const Scalar dk = static_cast<Scalar>(k);
    const Scalar dK = static_cast<Scalar>(K);
    return (1.0 - lambda) * (1.0 / dn + 1.0 / dk - 1.0 / (dk * dK) - dK / dn);
}

Scalar reference_value(Scalar lambda, Index k, Index n) {
    const Scalar dn = static_cast<Scalar>(n);
    const Scalar dk = static_cast<Scalar>(k);
    return (1.0 - lambda) * (1.0 / dn + 1.0 / dk - 2.0 / std::sqrt(dn * dk));
}

std::vector<Index> default_k_grid(Index n) {
    const Index base = static_cast<Index>(std::floor(std::log(static_cast<Scalar>(n))));
    std::vector<Index> grid;
    for (Index mult = 1; mult <= 4; ++mult) {
        Index k = std::clamp<Index>(mult * base, 1, n - 1);
        if (grid.empty() || grid.back() != k) grid.push_back(k);
    }
    return grid;
}

std::vector<Scalar> default_lambda_grid(Index n) {
    const Scalar unit = 1.0 / std::sqrt(static_cast<Scalar>(n));
    std::vector<Scalar> grid;
    for (int mult = 1; mult <= 5; ++mult) {
        const Scalar lam = mult * unit;
        if (lam < 1.0) grid.push_back(lam);
    }
    return grid;
}

GridSearchResult grid_search(const DataMatrix& data, graph::DistanceMetric metric,
                             const GridSpec& spec) {
    data.validate();
    const Index n = data.n();

    std::vector<Index> k_grid = spec.k_grid.empty() ? default_k_grid(n) : spec.k_grid;
    std::vector<Scalar> lambda_grid =
        spec.lambda_grid.empty() ? default_lambda_grid(n) : spec.lambda_grid;
    std::sort(k_grid.begin(), k_grid.end());
    k_grid.erase(std::unique(k_grid.begin(), k_grid.end()), k_grid.end());
    std::sort(lambda_grid.begin(), lambda_grid.end());
    lambda_grid.erase(std::unique(lambda_grid.begin(), lambda_grid.end()), lambda_grid.end());

    if (lambda_grid.empty())
        throw config_error(
            "lambda grid is empty: the default n^{-1/2} grid collapses for small n; "
            "pass an explicit lambda grid");
    for (Scalar lam : lambda_grid)
        if (!(lam > 0 && lam < 1)) throw config_error("lambda grid entries must lie in (0, 1)");
    for (Index k : k_grid)
        if (k < 1 || k >= n) throw config_error("k grid entries must lie in [1, n-1]");
    if (spec.K_max < 2) throw config_error("K_max must be at least 2");

    GridSearchResult res;
    bool have_best = false;
    bool any_K = false;

    for (Index k : k_grid) {
        const auto W = graph::build_knn_graph(data, k, metric);
        const auto candidates = candidate_set(W, data, k, metric, spec.cap);
        const Index Kp = static_cast<Index>(candidates.indices.size());

        for (Scalar lam : lambda_grid) {
            const auto columns = chain::solve_resolvent_columns(W, lam, candidates.indices,
                                                                spec.tol);
            const auto scores = selection_scores(columns);

            for (Index K = 2; K <= std::min(spec.K_max, Kp); ++K) {
                any_K = true;
                const auto selected = select_informative(scores, candidates, K);

                std::vector<chain::ResolventColumn> picked;
                picked.reserve(static_cast<std::size_t>(K));
                for (Index idx : selected) {
                    auto it = std::find(candidates.indices.begin(), candidates.indices.end(), idx);
                    picked.push_back(
                        columns[static_cast<std::size_t>(it - candidates.indices.begin())]);
                }

                const auto F = chain::final_solution(W, lam, selected, picked);
                const auto rep = criterion(F, lam, k, n, K);
                const auto hard = chain::hard_labels(F);

                res.table.push_back(CriterionRow{metric, k, lam, K, rep.C, rep.R, rep.score,
                                                 hard.effective_clusters});

                const bool better =
                    !have_best || rep.score > res.result.report.score ||
                    (rep.score == res.result.report.score &&
                     (K < res.best.K ||
                      (K == res.best.K &&
                       (k > res.best.k || (k == res.best.k && lam > res.best.lambda)))));
                if (better) {
                    have_best = true;
                    res.best = ModelConfig{lam, k, K, metric, selected};
                    res.result.labels = hard.labels;
                    res.result.soft = F;
                    res.result.config = res.best;
                    res.result.report = rep;
                    res.result.effective_clusters = hard.effective_clusters;
                }
            }
        }
    }

    if (!any_K) throw config_error("empty K range: no configuration yielded K >= 2 candidates");
    return res;
}

}  // namespace cns::select
