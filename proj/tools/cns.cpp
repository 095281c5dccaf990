// Command-line front end: fit (automatic clustering), eval (external
// validity metrics), sweep (benchmark a directory of labeled CSVs).

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "cns/data.hpp"
#include "cns/eval.hpp"
#include "cns/select.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace cns;

namespace {

constexpr const char* kVersion = "0.1.0";

struct FitOptions {
    std::string input;
    std::string metric = "euclidean";
    std::string k_grid = "auto";
    std::string lambda_grid = "auto";
    Index kmax = 30;
    Index cap = 300;
    Scalar tol = 1e-10;
    bool no_pca = false;
    Index max_pcs = 100;
    bool no_header = false;
    std::string label_column;  // stripped before fitting, never used by it
    std::string labels_out = "labels.csv";
    std::string soft_out = "soft.csv";
    std::string report_out = "report.json";
};

std::vector<Scalar> parse_scalar_list(const std::string& text, const std::string& flag) {
    std::vector<Scalar> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw config_error(flag + ": cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw config_error(flag + ": empty list");
    return out;
}

struct FitOutcome {
    select::GridSearchResult search;
    std::vector<std::string> warnings;
    json manifest;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FitOutcome run_fit_pipeline(const DataMatrix& raw, const FitOptions& opt) {
    FitOutcome out;
    out.manifest["tool_version"] = kVersion;

    auto t0 = std::chrono::steady_clock::now();
    auto std_res = data::standardize(raw);
    out.warnings = std_res.warnings;
    DataMatrix prepared = std_res.data;
    if (!opt.no_pca) prepared = data::pca_reduce(prepared, opt.max_pcs);
    out.manifest["preprocess_seconds"] = seconds_since(t0);
    out.manifest["pca"] = !opt.no_pca;
    out.manifest["max_pcs"] = opt.max_pcs;
    out.manifest["n"] = prepared.n();
    out.manifest["d"] = prepared.d();

    select::GridSpec spec;
    if (opt.k_grid != "auto") {
        for (Scalar v : parse_scalar_list(opt.k_grid, "--k-grid"))
            spec.k_grid.push_back(static_cast<Index>(v));
    }
    if (opt.lambda_grid != "auto") spec.lambda_grid = parse_scalar_list(opt.lambda_grid, "--lambda-grid");
    spec.K_max = opt.kmax;
    spec.cap = opt.cap;
    spec.tol = opt.tol;

    t0 = std::chrono::steady_clock::now();
    out.search = select::grid_search(prepared, graph::metric_from_string(opt.metric), spec);
    out.manifest["search_seconds"] = seconds_since(t0);

    // grids as actually run (post clamping/filtering)
    const auto ks = spec.k_grid.empty() ? select::default_k_grid(prepared.n()) : spec.k_grid;
    const auto lams =
        spec.lambda_grid.empty() ? select::default_lambda_grid(prepared.n()) : spec.lambda_grid;
    out.manifest["k_grid"] = ks;
    out.manifest["lambda_grid"] = lams;
    out.manifest["K_max"] = opt.kmax;
    out.manifest["cap"] = opt.cap;
    out.manifest["tol"] = opt.tol;
    return out;
}

json table_to_json(const std::vector<select::CriterionRow>& table) {
    json rows = json::array();
    for (const auto& r : table) {
        rows.push_back({{"metric", graph::to_string(r.metric)},
                        {"k", r.k},
                        {"lambda", r.lambda},
                        {"K", r.K},
                        {"C", r.C},
                        {"R", r.R},
                        {"score", r.score},
                        {"effective_clusters", r.effective_clusters}});
    }
    return rows;
}

void write_report(const std::string& path, const FitOutcome& out, const std::string& input) {
    const auto& res = out.search.result;
    json report;
    report["config"] = {{"metric", graph::to_string(res.config.metric)},
                        {"k", res.config.k},
                        {"lambda", res.config.lambda},
                        {"K", res.config.K},
                        {"selected", res.config.selected}};
    report["criterion"] = {{"C", res.report.C},
                           {"R", res.report.R},
                           {"score", res.report.score},
                           {"mean_final_max", res.report.mean_final_max},
                           {"initial_reference", res.report.initial_reference},
                           {"effective_clusters", res.effective_clusters}};
    json manifest = out.manifest;
    manifest["input"] = input;
    manifest["warnings"] = out.warnings;
    report["manifest"] = manifest;
    report["table"] = table_to_json(out.search.table);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot write '" + path + "'");
    f << report.dump(2) << '\n';
}

void write_labels(const std::string& path, const LabelVector& labels) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot write '" + path + "'");
    f << "row,label\n";
    for (std::size_t i = 0; i < labels.labels.size(); ++i)
        f << i << ',' << labels.labels[i] << '\n';
}

void write_soft(const std::string& path, const SoftAssignment& soft) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot write '" + path + "'");
    f << "row";
    for (Index j = 0; j < soft.K(); ++j) f << ",p" << j;
    f << '\n';
    char buf[64];
    for (Index i = 0; i < soft.n(); ++i) {
        f << i;
        for (Index j = 0; j < soft.K(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", soft.values(i, j));
            f << ',' << buf;
        }
        f << '\n';
    }
}

LabelVector read_label_file(const std::string& path) {
    auto loaded = data::load_csv(path, std::string("label"), true);
    if (!loaded.labels) throw parse_error(path + ": no label column");
    return *loaded.labels;
}

int cmd_fit(const FitOptions& opt) {
    std::optional<std::string> strip;
    if (!opt.label_column.empty()) strip = opt.label_column;
    auto loaded = data::load_csv(opt.input, strip, !opt.no_header);

    auto out = run_fit_pipeline(loaded.data, opt);
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';

    write_labels(opt.labels_out, out.search.result.labels);
    write_soft(opt.soft_out, out.search.result.soft);
    write_report(opt.report_out, out, opt.input);

    const auto& best = out.search.best;
    std::cout << "best: metric=" << graph::to_string(best.metric) << " k=" << best.k
              << " lambda=" << best.lambda << " K=" << best.K
              << " score=" << out.search.result.report.score
              << " effective_clusters=" << out.search.result.effective_clusters << '\n';
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path) {
    auto pred = read_label_file(pred_path);
    auto truth = read_label_file(truth_path);
    auto rep = eval::evaluate(truth, pred);

    std::printf("metric     x100\n");
    std::printf("accuracy  %6.2f\n", rep.accuracy * 100.0);
    std::printf("ari       %6.2f\n", rep.ari * 100.0);
    std::printf("ami       %6.2f\n", rep.ami * 100.0);
    json j{{"accuracy", rep.accuracy}, {"ari", rep.ari}, {"ami", rep.ami}};
    std::cout << j.dump() << '\n';
    return 0;
}

struct SweepRow {
    std::string dataset;
    bool failed = false;
    std::string error;
    eval::MetricReport cnse, cnsc;
};

int cmd_sweep(const std::string& dir, const std::string& label_column, const FitOptions& base,
              const std::string& out_csv) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw io_error("'" + dir + "' is not a directory");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) std::cerr << "warning: no CSV files in '" << dir << "'\n";

    std::vector<SweepRow> rows;
    for (const auto& file : files) {
        SweepRow row;
        row.dataset = file.stem().string();
        try {
            auto loaded = data::load_csv(file.string(), label_column, true);
            if (!loaded.labels)
                throw parse_error(file.string() + ": label column '" + label_column +
                                  "' not found");
            for (auto metric : {graph::DistanceMetric::euclidean, graph::DistanceMetric::cosine}) {
                FitOptions opt = base;
                opt.metric = graph::to_string(metric);
                auto out = run_fit_pipeline(loaded.data, opt);
                auto rep = eval::evaluate(*loaded.labels, out.search.result.labels);
                (metric == graph::DistanceMetric::euclidean ? row.cnse : row.cnsc) = rep;
            }
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(row);
    }

    std::ofstream csv(out_csv, std::ios::binary);
    if (!csv) throw io_error("cannot write '" + out_csv + "'");
    csv << "dataset,cnse_ami,cnse_ari,cnse_acc,cnsc_ami,cnsc_ari,cnsc_acc,error\n";
    std::printf("%-20s %10s %10s %10s %10s %10s %10s\n", "dataset", "CNSe.AMI", "CNSe.ARI",
                "CNSe.ACC", "CNSc.AMI", "CNSc.ARI", "CNSc.ACC");
    for (const auto& r : rows) {
        if (r.failed) {
            csv << r.dataset << ",,,,,,,\"" << r.error << "\"\n";
            std::printf("%-20s %10s %10s %10s %10s %10s %10s  (failed)\n", r.dataset.c_str(), "-",
                        "-", "-", "-", "-", "-");
            std::cerr << "warning: " << r.dataset << " failed: " << r.error << '\n';
            continue;
        }
        char line[256];
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.cnse.ami,
                      r.cnse.ari, r.cnse.accuracy, r.cnsc.ami, r.cnsc.ari, r.cnsc.accuracy);
        csv << r.dataset << ',' << line << ",\n";
        std::printf("%-20s %10.2f %10.2f %10.2f %10.2f %10.2f %10.2f\n", r.dataset.c_str(),
                    r.cnse.ami * 100, r.cnse.ari * 100, r.cnse.accuracy * 100, r.cnsc.ami * 100,
                    r.cnsc.ari * 100, r.cnsc.accuracy * 100);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CNS: clustering by non-parametric smoothing over a kNN transition graph"};
    app.set_version_flag("--version", kVersion);
    app.footer(
        "Exit codes: 1 usage, 2 I/O, 3 parse failure, 4 invalid configuration,\n"
        "5 invalid data, 6 solver failure.");

    FitOptions fit;
    auto* cfit = app.add_subcommand("fit", "cluster a CSV of numeric features");
    cfit->add_option("--input", fit.input, "input CSV path")->required();
    cfit->add_option("--metric", fit.metric, "euclidean or cosine")
        ->check(CLI::IsMember({"euclidean", "cosine"}));
    cfit->add_option("--k-grid", fit.k_grid, "comma list of k values, or 'auto'");
    cfit->add_option("--lambda-grid", fit.lambda_grid, "comma list of lambda values, or 'auto'");
    cfit->add_option("--kmax", fit.kmax, "largest K considered (default 30)");
    cfit->add_option("--cap", fit.cap, "candidate-set cap (default 300)");
    cfit->add_option("--tol", fit.tol, "resolvent solver tolerance (default 1e-10)");
    cfit->add_flag("--no-pca", fit.no_pca, "skip the principal-component projection");
    cfit->add_option("--max-pcs", fit.max_pcs, "PCA dimension cap (default 100)");
    cfit->add_flag("--no-header", fit.no_header, "input has no header row");
    cfit->add_option("--label-column", fit.label_column,
                     "column to strip before fitting (never shown to the model)");
    cfit->add_option("--labels-out", fit.labels_out, "hard-label CSV output");
    cfit->add_option("--soft-out", fit.soft_out, "soft-assignment CSV output");
    cfit->add_option("--report-out", fit.report_out, "JSON report output");

    std::string pred_path, truth_path;
    auto* ceval = app.add_subcommand("eval", "compare predicted labels against ground truth");
    ceval->add_option("--pred", pred_path, "predicted label CSV (row,label)")->required();
    ceval->add_option("--truth", truth_path, "ground-truth label CSV (row,label)")->required();

    std::string sweep_dir, sweep_label = "class", sweep_csv = "sweep.csv";
    auto* csweep = app.add_subcommand("sweep", "benchmark every labeled CSV in a directory");
    csweep->add_option("--dir", sweep_dir, "directory of labeled CSVs")->required();
    csweep->add_option("--label-column", sweep_label, "ground-truth column name (default 'class')");
    csweep->add_option("--out", sweep_csv, "results CSV output");
    csweep->add_option("--kmax", fit.kmax, "largest K considered (default 30)");
    csweep->add_option("--tol", fit.tol, "resolvent solver tolerance");

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (cfit->parsed()) return cmd_fit(fit);
        if (ceval->parsed()) return cmd_eval(pred_path, truth_path);
        return cmd_sweep(sweep_dir, sweep_label, fit, sweep_csv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
