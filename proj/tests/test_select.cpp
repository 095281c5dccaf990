#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <numeric>

#include "cns/eval.hpp"
#include "cns/select.hpp"
#include "test_util.hpp"

using namespace cns;
using graph::DistanceMetric;

namespace {

graph::TransitionMatrix two_cycle() {
    graph::TransitionMatrix W;
    W.n = 2;
    W.k = 1;
    W.rows.resize(2, 1);
    W.rows << 1, 0;
    W.refresh_col_l1();
    return W;
}

// Perfectly clusterable fixture: K clusters of k members plus one informative
// point. Members see their k-1 co-members and the informative point; the
// informative point sees itself and k-1 members (self-loops are fine for the
// chain algebra even though built graphs never contain them).
struct IdealizedFixture {
    graph::TransitionMatrix W;
    std::vector<Index> informative;
};

IdealizedFixture idealized_graph(Index k, Index K) {
    IdealizedFixture fx;
    const Index cluster = k + 1;
    fx.W.n = K * cluster;
    fx.W.k = k;
    fx.W.rows.resize(fx.W.n, k);
    for (Index c = 0; c < K; ++c) {
        const Index base = c * cluster;
        fx.informative.push_back(base);
        Index col = 0;
        fx.W.rows(base, col = 0) = base;  // self-loop
        for (Index m = 1; m < k; ++m) fx.W.rows(base, m) = base + m;
        for (Index m = 1; m <= k; ++m) {
            col = 0;
            fx.W.rows(base + m, col++) = base;
            for (Index o = 1; o <= k; ++o)
                if (o != m && col < k) fx.W.rows(base + m, col++) = base + o;
        }
    }
    fx.W.refresh_col_l1();
    return fx;
}

}  // namespace

TEST_CASE("all-duplicate data makes every point a candidate") {
    // Three identical points with k = 2: each row lists the other two, so
    // every column norm is 1 and the >= rule admits all of them. (For larger
    // duplicated sets the index tie-break concentrates in-degree on the low
    // indices and the norms are no longer equal.)
    DataMatrix d;
    d.values = Matrix::Constant(3, 2, 3.0);
    auto W = graph::build_knn_graph(d, 2, DistanceMetric::euclidean);
    auto cs = select::candidate_set(W, d, 2, DistanceMetric::euclidean);
    CHECK(cs.indices.size() == 3);
    CHECK_FALSE(cs.capped);
}

TEST_CASE("path graph keeps only the in-degree local maximum") {
    DataMatrix d;
    d.values.resize(3, 1);
    d.values << 0.0, 1.0, 3.0;
    auto W = graph::build_knn_graph(d, 1, DistanceMetric::euclidean);
    auto cs = select::candidate_set(W, d, 1, DistanceMetric::euclidean);
    CHECK(cs.indices == std::vector<Index>{1});
}

TEST_CASE("cap keeps the highest magnitude-times-separation scores") {
    // 350 isolated pairs of mutual nearest neighbours, every point a candidate.
    const Index pairs = 350;
    DataMatrix d;
    d.values = Matrix::Zero(2 * pairs, 2);
    for (Index p = 0; p < pairs; ++p) {
        const Scalar eps = 0.1 + 0.001 * static_cast<Scalar>(p);
        d.values(2 * p, 0) = 1000.0 * static_cast<Scalar>(p);
        d.values(2 * p + 1, 0) = 1000.0 * static_cast<Scalar>(p) + eps;
        d.values(2 * p, 1) = 0.5;
        d.values(2 * p + 1, 1) = 0.5;
    }
    auto W = graph::build_knn_graph(d, 1, DistanceMetric::euclidean);
    auto cs = select::candidate_set(W, d, 1, DistanceMetric::euclidean, 300);
    REQUIRE(cs.capped);
    REQUIRE(cs.indices.size() == 300);

    // Brute-force oracle over the uncapped candidate set.
    std::vector<Index> all(2 * pairs);
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::pair<Scalar, Index>> scored;
    for (Index i : all) {
        Scalar min_d = std::numeric_limits<Scalar>::infinity();
        for (Index j : all)
            if (j != i) min_d = std::min(min_d, graph::distance(d, i, j,
                                                                DistanceMetric::euclidean));
        scored.emplace_back(W.col_l1[i] * min_d, i);
    }
    std::sort(scored.begin(), scored.end(), [](auto& a, auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<Index> expect;
    for (std::size_t i = 0; i < 300; ++i) expect.push_back(scored[i].second);
    std::sort(expect.begin(), expect.end());
    CHECK(cs.indices == expect);
    for (std::size_t i = 0; i < cs.indices.size(); ++i) {
        const auto it = std::find_if(scored.begin(), scored.end(),
                                     [&](auto& sc) { return sc.second == cs.indices[i]; });
        CHECK(cs.scores[i] == doctest::Approx(it->first).epsilon(1e-12));
    }
}

TEST_CASE("selection scores on the 2x2 example") {
    auto W = two_cycle();
    auto cols = chain::solve_resolvent_columns(W, 0.5, {0, 1}, 1e-12);
    auto sc = select::selection_scores(cols);
    CHECK(sc.s[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(sc.s[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(sc.c(0, 1) == doctest::Approx(16.0 / 9.0).epsilon(1e-10));
    CHECK(sc.c(1, 0) == doctest::Approx(16.0 / 9.0).epsilon(1e-10));
    CHECK(std::isinf(sc.c(0, 0)));

    auto single = select::selection_scores({cols[0]});
    CHECK(single.s.size() == 1);
    CHECK(std::isinf(single.c(0, 0)));
}

TEST_CASE("disconnected components give orthogonal resolvent columns") {
    auto [d, truth] = testutil::blobs({Vector::Constant(2, -50.0), Vector::Constant(2, 50.0)}, 15,
                                      41);
    auto W = graph::build_knn_graph(d, 3, DistanceMetric::euclidean);
    auto cols = chain::solve_resolvent_columns(W, 0.9, {0, 15}, 1e-12);
    auto sc = select::selection_scores(cols);
    CHECK(sc.c(0, 1) <= 1e-9 * sc.s[0] * sc.s[1]);
}

TEST_CASE("greedy selection: magnitude first, then dissimilarity") {
    select::CandidateSet cands;
    cands.indices = {10, 20, 30};
    select::SelectionScores sc;
    sc.s = Vector(3);
    sc.s << 2.0, 2.0, 1.5;
    sc.c = Matrix(3, 3);
    sc.c << 0, 4.0, 0.1, 4.0, 0, 0.1, 0.1, 0.1, 0;
    sc.c.diagonal().setConstant(std::numeric_limits<Scalar>::infinity());

    CHECK(select::select_informative(sc, cands, 1) == std::vector<Index>{10});
    CHECK(select::select_informative(sc, cands, 2) == std::vector<Index>{10, 30});
    CHECK_THROWS_AS(select::select_informative(sc, cands, 4), Error);
}

TEST_CASE("greedy selection matches an independent re-evaluation for K = K'") {
    auto W = testutil::random_knn_graph(40, 4, 42);
    auto d = testutil::random_data(40, 3, 42);
    std::vector<Index> cand_idx{1, 5, 9, 14, 22, 31, 38};
    auto cols = chain::solve_resolvent_columns(W, 0.2, cand_idx, 1e-12);
    auto sc = select::selection_scores(cols);
    select::CandidateSet cands;
    cands.indices = cand_idx;

    auto got = select::select_informative(sc, cands, 7);

    // Independent greedy recursion.
    std::vector<Index> picked;
    Index first = 0;
    for (Index j = 1; j < 7; ++j)
        if (sc.s[j] > sc.s[first]) first = j;
    picked.push_back(first);
    while (picked.size() < 7) {
        Index best = -1;
        Scalar best_v = std::numeric_limits<Scalar>::infinity();
        for (Index j = 0; j < 7; ++j) {
            Scalar worst = 0;
            for (Index l : picked) worst = std::max(worst, sc.c(j, l));
            if (worst / (sc.s[j] * sc.s[j]) < best_v) {
                best_v = worst / (sc.s[j] * sc.s[j]);
                best = j;
            }
        }
        picked.push_back(best);
    }
    std::vector<Index> expect;
    for (Index pos : picked) expect.push_back(cand_idx[static_cast<std::size_t>(pos)]);
    CHECK(got == expect);
}

TEST_CASE("greedy selection is invariant to candidate order when scores are distinct") {
    auto W = testutil::random_knn_graph(30, 3, 43);
    std::vector<Index> cand_idx{2, 7, 12, 19, 27};
    auto cols = chain::solve_resolvent_columns(W, 0.25, cand_idx, 1e-12);
    auto sc = select::selection_scores(cols);
    select::CandidateSet cands;
    cands.indices = cand_idx;
    auto base = select::select_informative(sc, cands, 3);
    std::sort(base.begin(), base.end());

    std::vector<std::size_t> perm{4, 1, 3, 0, 2};
    select::CandidateSet pc;
    std::vector<chain::ResolventColumn> pcols;
    for (std::size_t p : perm) {
        pc.indices.push_back(cand_idx[p]);
        pcols.push_back(cols[p]);
    }
    auto psc = select::selection_scores(pcols);
    auto permuted = select::select_informative(psc, pc, 3);
    std::sort(permuted.begin(), permuted.end());
    CHECK(permuted == base);
}

TEST_CASE("criterion values on forced examples") {
    SoftAssignment F{Matrix(2, 2)};
    F.values << 2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0;
    auto rep = select::criterion(F, 0.5, 1, 2, 2);
    CHECK(rep.mean_final_max == doctest::Approx(2.0 / 3.0));
    CHECK(rep.initial_reference == doctest::Approx(1.0));
    CHECK(rep.C == doctest::Approx(-1.0 / 3.0));
    CHECK(rep.C + rep.initial_reference == rep.mean_final_max);

    SoftAssignment I{Matrix::Identity(4, 4)};
    auto rep2 = select::criterion(I, 0.5, 2, 4, 4);
    CHECK(rep2.C == doctest::Approx(0.0));

    CHECK(select::reference_value(0.5, 4, 100) == doctest::Approx(0.08));
    CHECK_THROWS_AS(select::criterion(I, 0.5, 4, 4, 4), Error);  // k = n degenerates R
}

TEST_CASE("idealized limit rows") {
    auto rows = select::idealized_limits(0.5, 4, 2);
    CHECK(rows.member[0] == doctest::Approx(0.125 + 0.4375));
    CHECK(rows.member[1] == doctest::Approx(0.4375));
    CHECK(rows.member.sum() == doctest::Approx(1.0));
    CHECK(rows.informative.sum() == doctest::Approx(1.0));

    // k = 1: member = (1-lambda) e_j + (lambda/K) 1.
    auto k1 = select::idealized_limits(0.3, 1, 3);
    CHECK(k1.member[0] == doctest::Approx(0.7 + 0.1));
    CHECK(k1.member[1] == doctest::Approx(0.1));

    // lambda -> 1 pins the initial values.
    auto pinned = select::idealized_limits(1.0 - 1e-12, 5, 4);
    CHECK(pinned.member[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(pinned.informative[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pinned.informative[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("idealized improvement formula") {
    CHECK(select::idealized_improvement(0.3, 5, 1, 50) == doctest::Approx(0.0));
    CHECK(select::idealized_improvement(0.5, 4, 3, 100) ==
          doctest::Approx(0.5 * (0.01 + 0.25 - 1.0 / 12.0 - 0.03)));
    // Maximizer substitution: n = k K^2 gives equality with R.
    CHECK(select::idealized_improvement(0.2, 4, 3, 36) ==
          doctest::Approx(select::reference_value(0.2, 4, 36)).epsilon(1e-14));
}

TEST_CASE("R dominates the idealized improvement for every integer K") {
    int combos = 0;
    for (Index n : {20, 50, 100, 400, 1000}) {
        for (Index k : {1, 2, 5, 10, 20}) {
            for (Scalar lambda : {0.05, 0.2, 0.5, 0.9, 0.99}) {
                ++combos;
                const Scalar R = select::reference_value(lambda, k, n);
                for (Index K = 1; K <= n; ++K)
                    CHECK(R - select::idealized_improvement(lambda, k, K, n) >= -1e-12);
            }
        }
    }
    CHECK(combos >= 100);
}

TEST_CASE("explicit idealized graph reproduces the closed-form limits") {
    for (Index k : {2, 4, 8}) {
        for (Index K : {2, 3, 5}) {
            for (Scalar lambda : {0.1, 0.5}) {
                auto fx = idealized_graph(k, K);
                auto cols = chain::solve_resolvent_columns(fx.W, lambda, fx.informative, 1e-13);
                auto F = chain::final_solution(fx.W, lambda, fx.informative, cols);
                auto limits = select::idealized_limits(lambda, k, K);
                for (Index c = 0; c < K; ++c) {
                    const Index base = c * (k + 1);
                    // informative row of cluster c
                    for (Index j = 0; j < K; ++j) {
                        const Scalar expect =
                            (j == c) ? limits.informative[0] : limits.informative[1];
                        CHECK(std::abs(F.values(base, j) - expect) <= 1e-9);
                    }
                    for (Index m = 1; m <= k; ++m)
                        for (Index j = 0; j < K; ++j) {
                            const Scalar expect = (j == c) ? limits.member[0] : limits.member[1];
                            CHECK(std::abs(F.values(base + m, j) - expect) <= 1e-9);
                        }
                }
            }
        }
    }
}

TEST_CASE("default grids") {
    CHECK(select::default_k_grid(1000) == std::vector<Index>{6, 12, 18, 24});
    auto lam = select::default_lambda_grid(1000);
    REQUIRE(lam.size() == 5);
    CHECK(lam[0] == doctest::Approx(0.0316227766).epsilon(1e-8));
    CHECK(lam[4] == doctest::Approx(0.158113883).epsilon(1e-8));

    // entries >= 1 are discarded
    auto small = select::default_lambda_grid(16);
    CHECK(small == std::vector<Scalar>{0.25, 0.5, 0.75});

    // k grid clamps to [1, n-1] and deduplicates
    auto kg = select::default_k_grid(8);  // floor(log 8) = 2 -> {2,4,6,7}
    CHECK(kg == std::vector<Index>{2, 4, 6, 7});
}

TEST_CASE("grid search recovers two separated blobs with K = 2") {
    Vector c1 = Vector::Constant(10, 10.0 / (2.0 * std::sqrt(10.0)));
    auto [d, truth] = testutil::blobs({-c1, c1}, 50, 44);
    auto res = select::grid_search(d, DistanceMetric::euclidean);
    CHECK(res.best.K == 2);
    CHECK(eval::evaluate(truth, res.result.labels).ari == doctest::Approx(1.0));

    // purity: identical rerun gives identical selection and labels
    auto rerun = select::grid_search(d, DistanceMetric::euclidean);
    CHECK(rerun.best.K == res.best.K);
    CHECK(rerun.best.k == res.best.k);
    CHECK(rerun.best.lambda == res.best.lambda);
    CHECK(rerun.best.selected == res.best.selected);
    CHECK(rerun.result.labels.labels == res.result.labels.labels);
}

TEST_CASE("grid search on a single blob reports a small score") {
    auto [d, truth] = testutil::blobs({Vector::Zero(5)}, 120, 45);
    auto res = select::grid_search(d, DistanceMetric::euclidean);
    CHECK(res.result.report.score < 0.5);
    CHECK_FALSE(res.table.empty());
}

TEST_CASE("grid search table is canonically ordered and errors are clear") {
    auto [d, truth] = testutil::blobs({Vector::Constant(3, -8.0), Vector::Constant(3, 8.0)}, 30,
                                      46);
    select::GridSpec spec;
    spec.k_grid = {5};
    spec.lambda_grid = {0.1};
    spec.K_max = 4;
    auto res = select::grid_search(d, DistanceMetric::euclidean, spec);
    CHECK(res.table.size() == 3);  // K in {2,3,4}
    for (std::size_t i = 1; i < res.table.size(); ++i)
        CHECK(res.table[i].K > res.table[i - 1].K);

    select::GridSpec bad;
    bad.lambda_grid = {1.5};
    CHECK_THROWS_AS(select::grid_search(d, DistanceMetric::euclidean, bad), Error);
}
