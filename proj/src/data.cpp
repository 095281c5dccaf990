#include "cns/data.hpp"

#include <Eigen/SVD>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cns::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& field, Scalar& out) {
    const std::string t = trim(field);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

}  // namespace

LoadResult parse_csv(const std::string& text, const std::optional<std::string>& label_column,
                     bool has_header, const std::string& origin) {
    std::vector<std::string> lines;
    {
        std::stringstream ss(text);
        std::string line;
        while (std::getline(ss, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!trim(line).empty()) lines.push_back(line);
        }
    }
    if (lines.empty()) throw parse_error(origin + ": empty file");

    std::vector<std::string> header;
    std::size_t first_data = 0;
    if (has_header) {
        for (auto& h : split_line(lines[0])) header.push_back(trim(h));
        first_data = 1;
        if (lines.size() == first_data) throw parse_error(origin + ": no data rows");
    }

    const std::size_t arity = split_line(lines[first_data]).size();
    if (has_header && header.size() != arity)
        throw parse_error(origin + ": header arity " + std::to_string(header.size()) +
                          " does not match row arity " + std::to_string(arity));

    Index label_idx = -1;
    if (label_column) {
        if (has_header) {
            for (std::size_t c = 0; c < header.size(); ++c)
                if (header[c] == *label_column) label_idx = static_cast<Index>(c);
            if (label_idx < 0)
                throw parse_error(origin + ": label column '" + *label_column + "' not found");
        } else {
            Scalar v;
            if (!parse_number(*label_column, v) || v != std::floor(v) || v < 0 ||
                v >= static_cast<Scalar>(arity))
                throw parse_error(origin + ": headerless label column must be an index in [0, " +
                                  std::to_string(arity) + ")");
            label_idx = static_cast<Index>(v);
        }
    }

    const Index n = static_cast<Index>(lines.size() - first_data);
    const Index d = static_cast<Index>(arity) - (label_idx >= 0 ? 1 : 0);
    if (d < 1) throw parse_error(origin + ": no feature columns remain");

    DataMatrix data;
    data.values.resize(n, d);
    std::vector<std::string> raw_labels(label_idx >= 0 ? n : 0);

    for (Index r = 0; r < n; ++r) {
        const std::size_t line_no = first_data + static_cast<std::size_t>(r) + 1;
        auto fields = split_line(lines[first_data + static_cast<std::size_t>(r)]);
        if (fields.size() != arity)
            throw parse_error(origin + ": row " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(arity));
        Index c_out = 0;
        for (std::size_t c = 0; c < arity; ++c) {
            if (static_cast<Index>(c) == label_idx) {
                raw_labels[r] = trim(fields[c]);
                continue;
            }
            Scalar v;
            if (!parse_number(fields[c], v))
                throw parse_error(origin + ": row " + std::to_string(line_no) + ", column " +
                                  std::to_string(c + 1) + ": non-numeric value '" + fields[c] +
                                  "'");
            data.values(r, c_out++) = v;
        }
    }

    if (has_header) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (static_cast<Index>(c) != label_idx) data.column_names.push_back(header[c]);
    }
    data.validate();

    LoadResult result{std::move(data), std::nullopt};
    if (label_idx >= 0) {
        LabelVector lv;
        std::map<std::string, int> codes;
        for (auto& raw : raw_labels) {
            auto [it, inserted] = codes.try_emplace(raw, static_cast<int>(codes.size()));
            lv.labels.push_back(it->second);
        }
        lv.groups = static_cast<int>(codes.size());
        lv.validate();
        result.labels = std::move(lv);
    }
    return result;
}

LoadResult load_csv(const std::string& path, const std::optional<std::string>& label_column,
                    bool has_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), label_column, has_header, path);
}

StandardizeResult standardize(const DataMatrix& data) {
    data.validate();
    const Index n = data.n();
    const Vector mean = data.values.colwise().mean();
    Vector var(data.d());
    for (Index c = 0; c < data.d(); ++c)
        var[c] = (data.values.col(c).array() - mean[c]).square().sum() / static_cast<Scalar>(n - 1);

    StandardizeResult out;
    std::vector<Index> keep;
    for (Index c = 0; c < data.d(); ++c) {
        if (var[c] > 0) {
            keep.push_back(c);
        } else {
            std::string name = c < static_cast<Index>(data.column_names.size())
                                   ? data.column_names[c]
                                   : std::to_string(c);
            out.warnings.push_back("dropped zero-variance column " + name);
        }
    }
    if (keep.empty()) throw data_error("all columns have zero variance");

    out.data.values.resize(n, static_cast<Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.data.values.col(static_cast<Index>(i)) =
            data.values.col(keep[i]) / std::sqrt(var[keep[i]]);
        if (keep[i] < static_cast<Index>(data.column_names.size()))
            out.data.column_names.push_back(data.column_names[keep[i]]);
    }
    return out;
}

DataMatrix pca_reduce(const DataMatrix& data, Index max_dim) {
    data.validate();
    if (max_dim < 1) throw config_error("max_dim must be positive");
    if (data.d() <= max_dim) return data;

    Matrix centered = data.values.rowwise() - data.values.colwise().mean();
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // A centered matrix has rank at most n-1, so never keep more components.
    const Index m = std::max<Index>(
        1, std::min({max_dim, svd.matrixV().cols(), data.n() - 1}));
    Matrix V = svd.matrixV().leftCols(m);

    // Sign convention: largest-magnitude coordinate of each component positive.
    for (Index c = 0; c < m; ++c) {
        Index arg = 0;
        V.col(c).cwiseAbs().maxCoeff(&arg);
        if (V(arg, c) < 0) V.col(c) = -V.col(c);
    }

    DataMatrix out;
    out.values = centered * V;
    for (Index c = 0; c < m; ++c) out.column_names.push_back("pc" + std::to_string(c + 1));
    return out;
}

void write_csv(const std::string& path, const DataMatrix& data,
               const std::optional<LabelVector>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path + "'");
    if (!data.column_names.empty()) {
        for (Index c = 0; c < data.d(); ++c) {
            if (c) out << ',';
            out << data.column_names[c];
        }
        if (labels) out << ",label";
        out << '\n';
    }
    char buf[64];
    for (Index r = 0; r < data.n(); ++r) {
        for (Index c = 0; c < data.d(); ++c) {
            if (c) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", data.values(r, c));
            out << buf;
        }
        if (labels) out << ',' << labels->labels[static_cast<std::size_t>(r)];
        out << '\n';
    }
}

}  // namespace cns::data
