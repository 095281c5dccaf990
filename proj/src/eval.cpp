#include "cns/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cns::eval {

ContingencyTable contingency(const LabelVector& truth, const LabelVector& pred) {
    truth.validate();
    pred.validate();
    if (truth.size() != pred.size())
        throw data_error("label vectors have different lengths (" +
                         std::to_string(truth.size()) + " vs " + std::to_string(pred.size()) +
                         ")");

    ContingencyTable t;
    t.counts = Eigen::MatrixXi::Zero(truth.groups, pred.groups);
    for (std::size_t i = 0; i < truth.labels.size(); ++i)
        ++t.counts(truth.labels[i], pred.labels[i]);
    t.total = static_cast<int>(truth.labels.size());
    t.row_sums.resize(static_cast<std::size_t>(t.G()));
    t.col_sums.resize(static_cast<std::size_t>(t.K()));
    for (int g = 0; g < t.G(); ++g) t.row_sums[static_cast<std::size_t>(g)] = t.counts.row(g).sum();
    for (int c = 0; c < t.K(); ++c) t.col_sums[static_cast<std::size_t>(c)] = t.counts.col(c).sum();
    return t;
}

long long max_assignment(const Eigen::MatrixXi& square) {
    const int n = static_cast<int>(square.rows());
    if (square.cols() != n) throw config_error("assignment matrix must be square");
    const long long big = square.maxCoeff();
    constexpr long long inf = std::numeric_limits<long long>::max() / 4;

    // Hungarian algorithm with potentials on cost = big - value.
    std::vector<long long> u(static_cast<std::size_t>(n) + 1, 0),
        v(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<long long> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            long long delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const long long cur = (big - square(i0 - 1, j - 1)) -
                                      u[static_cast<std::size_t>(i0)] -
                                      v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    long long sum = 0;
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)] != 0)
            sum += square(p[static_cast<std::size_t>(j)] - 1, j - 1);
    return sum;
}

Scalar accuracy(const ContingencyTable& table) {
    const int m = std::max(table.G(), table.K());
    Eigen::MatrixXi square = Eigen::MatrixXi::Zero(m, m);
    square.topLeftCorner(table.G(), table.K()) = table.counts;
    return static_cast<Scalar>(max_assignment(square)) / static_cast<Scalar>(table.total);
}

namespace {

Scalar choose2(Scalar x) { return x * (x - 1.0) / 2.0; }

Scalar entropy(const std::vector<int>& sums, int n) {
    Scalar h = 0;
    for (int a : sums)
        if (a > 0) h -= (static_cast<Scalar>(a) / n) * std::log(static_cast<Scalar>(a) / n);
    return h;
}

// True when the two partitions are identical up to relabeling: every nonzero
// row and every nonzero column of the table holds exactly one nonzero cell.
bool partitions_identical(const ContingencyTable& t) {
    for (int g = 0; g < t.G(); ++g) {
        int nz = 0;
        for (int c = 0; c < t.K(); ++c) nz += t.counts(g, c) > 0;
        if (t.row_sums[static_cast<std::size_t>(g)] > 0 && nz != 1) return false;
    }
    for (int c = 0; c < t.K(); ++c) {
        int nz = 0;
        for (int g = 0; g < t.G(); ++g) nz += t.counts(g, c) > 0;
        if (t.col_sums[static_cast<std::size_t>(c)] > 0 && nz != 1) return false;
    }
    return true;
}

Scalar mutual_information(const ContingencyTable& t) {
    const Scalar n = t.total;
    Scalar mi = 0;
    for (int g = 0; g < t.G(); ++g)
        for (int c = 0; c < t.K(); ++c) {
            const int nij = t.counts(g, c);
            if (nij == 0) continue;
            const Scalar a = t.row_sums[static_cast<std::size_t>(g)];
            const Scalar b = t.col_sums[static_cast<std::size_t>(c)];
            mi += (nij / n) * std::log(n * nij / (a * b));
        }
    return mi;
}

// Exact expectation of MI under the hypergeometric (fixed-marginals) model.
Scalar expected_mutual_information(const ContingencyTable& t) {
    const int n = t.total;
    const Scalar dn = n;
    Scalar emi = 0;
    for (int g = 0; g < t.G(); ++g) {
        const int a = t.row_sums[static_cast<std::size_t>(g)];
        if (a == 0) continue;
        for (int c = 0; c < t.K(); ++c) {
            const int b = t.col_sums[static_cast<std::size_t>(c)];
            if (b == 0) continue;
            const int lo = std::max(1, a + b - n);
            const int hi = std::min(a, b);
            for (int nij = lo; nij <= hi; ++nij) {
                const Scalar log_p =
                    std::lgamma(a + 1.0) + std::lgamma(b + 1.0) + std::lgamma(n - a + 1.0) +
                    std::lgamma(n - b + 1.0) - std::lgamma(dn + 1.0) - std::lgamma(nij + 1.0) -
                    std::lgamma(a - nij + 1.0) - std::lgamma(b - nij + 1.0) -
                    std::lgamma(n - a - b + nij + 1.0);
                emi += (nij / dn) * std::log(dn * nij / (static_cast<Scalar>(a) * b)) *
                       std::exp(log_p);
            }
        }
    }
    return emi;
}

}  // namespace

Scalar ari(const ContingencyTable& t) {
    if (t.total < 2) throw data_error("ARI requires n >= 2");
    Scalar sum_cells = 0;
    for (int g = 0; g < t.G(); ++g)
        for (int c = 0; c < t.K(); ++c) sum_cells += choose2(t.counts(g, c));
    Scalar sum_a = 0, sum_b = 0;
    for (int a : t.row_sums) sum_a += choose2(a);
    for (int b : t.col_sums) sum_b += choose2(b);
    const Scalar expected = sum_a * sum_b / choose2(static_cast<Scalar>(t.total));
    const Scalar denom = 0.5 * (sum_a + sum_b) - expected;
    if (denom == 0) return 0.0;
    return (sum_cells - expected) / denom;
}

Scalar ami(const ContingencyTable& t) {
    if (t.total < 2) throw data_error("AMI requires n >= 2");
    if (partitions_identical(t)) return 1.0;

    const Scalar mi = mutual_information(t);
    const Scalar emi = expected_mutual_information(t);
    const Scalar normalizer = std::max(entropy(t.row_sums, t.total), entropy(t.col_sums, t.total));
    const Scalar denom = normalizer - emi;
    const Scalar numer = mi - emi;
    if (denom <= 1e-12 && numer <= 1e-12) return 0.0;
    return numer / denom;
}

MetricReport evaluate(const LabelVector& truth, const LabelVector& pred) {
    const auto table = contingency(truth, pred);
    return MetricReport{accuracy(table), ari(table), ami(table)};
}

}  // namespace cns::eval
