#include "covest/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "covest/common.hpp"

namespace covest {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ValidationError(std::string(what) + " must be a matrix");
    const std::size_t rows = j.size();
    const std::size_t cols = j.at(0).size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (!row.is_array() || row.size() != cols)
            throw ValidationError(std::string(what) + " rows have inconsistent lengths");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = row.at(c).get<double>();
    }
    return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

std::string kernel_constants_json(const Kernel& kernel) {
    json j;
    j["kernel"] = kernel.name();
    j["psi"] = kernel.psi();
    j["mu"] = kernel.mu();
    j["mu_tilde"] = kernel.mu_tilde();
    j["kappa"] = kernel.kappas().kappa;
    j["kappa_bar"] = kernel.kappas().kappa_bar;
    j["kappa_tilde"] = kernel.kappas().kappa_tilde;
    return dump(j);
}

std::string estimate_report_json(const std::vector<std::string>& assets, const CovEstimate& est,
                                 std::size_t n_total, const VarianceTensor* variance,
                                 const ConfidenceRegion* region,
                                 const std::vector<std::string>& warnings) {
    json j;
    j["assets"] = assets;
    j["n_total"] = n_total;
    j["k_n"] = est.k_n;
    j["theta_effective"] = est.theta;
    j["calibrated"] = est.calibrated;
    j["matrix"] = matrix_json(est.matrix);
    j["raw"] = matrix_json(est.raw);
    if (est.calibrated) j["calibration"] = matrix_json(est.calibration);
    j["overlap_counts"] = matrix_json(est.overlap_counts);
    if (variance) {
        json v;
        v["method"] = variance->method() == VarianceMethod::Subsample    ? "subsample"
                      : variance->method() == VarianceMethod::Plugin     ? "plugin"
                                                                         : "univariate";
        v["vec_matrix"] = matrix_json(variance->vec_matrix());
        v["negative_diagonals"] = variance->negative_diagonals();
        if (variance->dropped_terms) v["dropped_terms"] = variance->dropped_terms;
        j["variance"] = std::move(v);
    }
    if (region) {
        json r;
        r["level"] = region->level;
        r["z"] = region->z;
        json ivs = json::array();
        for (const auto& iv : region->intervals) {
            json e;
            e["k"] = iv.k + 1;
            e["l"] = iv.l + 1;
            e["estimate"] = iv.estimate;
            e["valid"] = iv.valid;
            if (iv.valid) {
                e["lo"] = iv.lo;
                e["hi"] = iv.hi;
            } else {
                e["reason"] = iv.reason;
            }
            ivs.push_back(std::move(e));
        }
        r["intervals"] = std::move(ivs);
        j["confidence"] = std::move(r);
    }
    j["warnings"] = warnings;
    return dump(j);
}

std::string mc_report_json(const McReport& report) {
    json j;
    j["scheme"] = report.scheme_label;
    j["reps"] = report.reps;
    j["failures"] = report.failures;
    if (!report.failure_messages.empty()) j["failure_messages"] = report.failure_messages;
    j["calibration_key"] = report.calibration_key;
    j["ci_level"] = report.ci_level;
    j["mean_n"] = report.mean_n;
    j["mean_kn"] = report.mean_kn;
    json entries = json::array();
    for (const auto& e : report.entries) {
        json x;
        x["entry"] = std::to_string(e.k + 1) + std::to_string(e.l + 1);
        x["rel_bias"] = e.rel_bias;
        x["rmse"] = e.rmse;
        x["rel_bias_raw"] = e.rel_bias_raw;
        x["rmse_raw"] = e.rmse_raw;
        x["coverage"] = e.coverage;
        x["std_mean"] = e.mean_std;
        x["std_var"] = e.var_std;
        entries.push_back(std::move(x));
    }
    j["entries"] = std::move(entries);
    json hist;
    hist["lo"] = report.hist_lo;
    hist["hi"] = report.hist_hi;
    hist["bins"] = report.hist_bins;
    hist["counts"] = report.hist_counts;
    j["std_histogram"] = std::move(hist);
    j["std_samples"] = report.std_samples;
    return dump(j);
}

std::string calibration_json(const CalibrationTable& table) {
    json j;
    j["key"] = table.key;
    j["rho"] = table.rho;
    j["reps"] = table.reps;
    j["factors"] = matrix_json(table.factors);
    j["has_var_factors"] = table.has_var_factors;
    if (table.has_var_factors) j["var_factors"] = matrix_json(table.var_factors);
    j["warnings"] = table.warnings;
    return dump(j);
}

CalibrationTable parse_calibration(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("calibration file is not valid JSON: ") + e.what());
    }
    CalibrationTable table;
    try {
        table.key = j.at("key").get<std::string>();
        table.rho = j.at("rho").get<double>();
        table.reps = j.at("reps").get<std::size_t>();
        table.factors = matrix_from_json(j.at("factors"), "factors");
        table.has_var_factors = j.value("has_var_factors", false);
        if (table.has_var_factors)
            table.var_factors = matrix_from_json(j.at("var_factors"), "var_factors");
        else
            table.var_factors = Matrix(table.factors.rows(), table.factors.cols(), 1.0);
        if (j.contains("warnings")) table.warnings = j.at("warnings").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("calibration file is malformed: ") + e.what());
    }
    if (table.factors.rows() != table.factors.cols())
        throw ValidationError("calibration factors must be square");
    if (table.var_factors.rows() != table.factors.rows() ||
        table.var_factors.cols() != table.factors.cols())
        throw ValidationError("calibration variance factors shape mismatch");
    for (std::size_t k = 0; k < table.factors.rows(); ++k)
        for (std::size_t l = 0; l < table.factors.cols(); ++l)
            if (!(table.factors(k, l) > 0.0))
                throw ValidationError("calibration factors must be positive");
    return table;
}

CalibrationTable load_calibration_file(const std::string& path) {
    return parse_calibration(read_text_file(path));
}

std::string simulate_manifest_json(const std::string& scheme_label, std::uint64_t seed,
                                   double gamma, double ma_theta,
                                   const std::vector<std::string>& files,
                                   const std::vector<Matrix>& truths) {
    if (files.size() != truths.size())
        throw ValidationError("manifest files and truths must align");
    json j;
    j["scheme"] = scheme_label;
    j["seed"] = seed;
    j["gamma"] = gamma;
    j["ma_theta"] = ma_theta;
    j["reps"] = files.size();
    json reps = json::array();
    for (std::size_t r = 0; r < files.size(); ++r) {
        json e;
        e["file"] = files[r];
        e["integrated_cov"] = matrix_json(truths[r]);
        reps.push_back(std::move(e));
    }
    j["replications"] = std::move(reps);
    return dump(j);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw ValidationError("write to '" + path + "' failed");
}

} // namespace covest
