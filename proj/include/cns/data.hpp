#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cns/types.hpp"

namespace cns::data {

struct LoadResult {
    DataMatrix data;
    std::optional<LabelVector> labels;
};

/// Loads a comma-delimited numeric file. When label_column names (or, for
/// headerless files, zero-based-indexes) a column, that column is stripped from
/// the features and its values are coded as dense integers in order of first
/// appearance.
LoadResult load_csv(const std::string& path, const std::optional<std::string>& label_column = {},
                    bool has_header = true);

/// Same parser on an in-memory buffer; load_csv delegates here.
LoadResult parse_csv(const std::string& text, const std::optional<std::string>& label_column,
                     bool has_header, const std::string& origin = "<memory>");

struct StandardizeResult {
    DataMatrix data;
    std::vector<std::string> warnings;  // one entry per dropped zero-variance column
};

/// Scales every column to unit sample variance (n-1 denominator) without
/// centering. Zero-variance columns are dropped and reported as warnings.
StandardizeResult standardize(const DataMatrix& data);

/// Projects onto the leading principal components when d exceeds max_dim;
/// otherwise returns the input untouched. Component signs follow a fixed
/// convention (largest-magnitude coordinate made positive) so results are
/// reproducible across platforms.
DataMatrix pca_reduce(const DataMatrix& data, Index max_dim = 100);

/// Writes features (and optional trailing label column) with 17 significant
/// digits so a reload round-trips bit-exactly.
void write_csv(const std::string& path, const DataMatrix& data,
               const std::optional<LabelVector>& labels = {});

}  // namespace cns::data
