#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace cns {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;
using IndexVector = Eigen::Matrix<Index, Eigen::Dynamic, 1>;
using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

/// Error categories mapped to distinct CLI exit codes.
enum class ErrorCode : int {
    usage = 1,
    io = 2,
    parse = 3,
    config = 4,
    data = 5,
    solver = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline Error io_error(const std::string& what) { return Error(ErrorCode::io, what); }
inline Error parse_error(const std::string& what) { return Error(ErrorCode::parse, what); }
inline Error config_error(const std::string& what) { return Error(ErrorCode::config, what); }
inline Error data_error(const std::string& what) { return Error(ErrorCode::data, what); }
inline Error solver_error(const std::string& what) { return Error(ErrorCode::solver, what); }

/// Numeric observations, one row per point. Entries must be finite.
struct DataMatrix {
    Matrix values;
    std::vector<std::string> column_names;  // empty when the source had no header

    Index n() const { return values.rows(); }
    Index d() const { return values.cols(); }

    void validate() const {
        if (values.rows() < 2) throw data_error("DataMatrix requires n >= 2");
        if (values.cols() < 1) throw data_error("DataMatrix requires d >= 1");
        if (!values.allFinite()) throw data_error("DataMatrix contains non-finite entries");
    }
};

/// Dense integer labels in [0, G).
struct LabelVector {
    std::vector<int> labels;
    int groups = 0;

    Index size() const { return static_cast<Index>(labels.size()); }

    void validate() const {
        if (groups < 1) throw data_error("LabelVector requires G >= 1");
        for (int v : labels)
            if (v < 0 || v >= groups) throw data_error("label out of range [0, G)");
    }
};

/// n x K matrix with rows on the probability simplex.
struct SoftAssignment {
    Matrix values;

    Index n() const { return values.rows(); }
    Index K() const { return values.cols(); }

    void validate(Scalar row_tol = 1e-9) const {
        if (values.cols() < 1) throw data_error("SoftAssignment requires K >= 1");
        for (Index i = 0; i < values.rows(); ++i) {
            for (Index j = 0; j < values.cols(); ++j) {
                Scalar v = values(i, j);
                if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
                    throw data_error("SoftAssignment entry outside [0,1]");
            }
            if (std::abs(values.row(i).sum() - 1.0) > row_tol)
                throw data_error("SoftAssignment row does not sum to 1");
        }
    }
};

}  // namespace cns
