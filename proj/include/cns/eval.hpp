#pragma once

#include <vector>

#include "cns/types.hpp"

namespace cns::eval {

/// G x K co-occurrence counts with cached marginals.
struct ContingencyTable {
    Eigen::MatrixXi counts;
    std::vector<int> row_sums;
    std::vector<int> col_sums;
    int total = 0;

    int G() const { return static_cast<int>(counts.rows()); }
    int K() const { return static_cast<int>(counts.cols()); }
};

struct MetricReport {
    Scalar accuracy = 0;
    Scalar ari = 0;
    Scalar ami = 0;
};

ContingencyTable contingency(const LabelVector& truth, const LabelVector& pred);

/// Classification accuracy after the optimal one-to-one matching of predicted
/// clusters to truth classes (assignment problem on the zero-padded square
/// table).
Scalar accuracy(const ContingencyTable& table);

/// Adjusted Rand Index; 0 when both partitions are trivial.
Scalar ari(const ContingencyTable& table);

/// Adjusted Mutual Information with the exact hypergeometric expected MI and
/// max-entropy normalization.
Scalar ami(const ContingencyTable& table);

MetricReport evaluate(const LabelVector& truth, const LabelVector& pred);

/// Maximum-sum assignment of columns to rows on a square matrix; returns the
/// matched sum. Exposed for reuse by accuracy and its tests.
long long max_assignment(const Eigen::MatrixXi& square);

}  // namespace cns::eval
