#include "covest/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "covest/common.hpp"

namespace covest {

using nlohmann::json;

void RunConfig::validate() const {
    if (!(theta > 0.0)) throw ValidationError("theta must be positive");
    if (kn_rule != "round" && kn_rule != "ceil")
        throw ValidationError("kn_rule must be 'round' or 'ceil'");
    if (variance != "subsample" && variance != "plugin" && variance != "univariate")
        throw ValidationError("variance must be 'subsample', 'plugin' or 'univariate'");
    if (!(varpi > 0.0)) throw ValidationError("varpi must be positive");
    if (!(eta > 0.5 && eta < 2.0 / 3.0)) throw ValidationError("eta must be in (1/2, 2/3)");
    if (!(spot_window >= 0.0 && spot_window < 1.0))
        throw ValidationError("spot_window must be in [0,1)");
    if (u_points < 5 || u_points % 2 == 0)
        throw ValidationError("u_points must be odd and at least 5");
    if (!(ci_level >= 0.0 && ci_level < 1.0)) throw ValidationError("ci_level must be in [0,1)");
    if (!(joint_tolerance >= 0.0)) throw ValidationError("joint_tolerance must be nonnegative");
    if (scheme != "subset" && scheme != "shifted" && scheme != "poisson")
        throw ValidationError("scheme must be 'subset', 'shifted' or 'poisson'");
    if (!(gamma >= 0.0)) throw ValidationError("gamma must be nonnegative");
    if (reps == 0) throw ValidationError("reps must be positive");
    if (calib_reps == 0) throw ValidationError("calib_reps must be positive");
    if (!(calib_rho >= -1.0 && calib_rho <= 1.0) || calib_rho == 0.0)
        throw ValidationError("calib_rho must be nonzero and in [-1,1]");
    if (threads == 0) throw ValidationError("threads must be positive");
    make_scheme(); // scheme-specific count checks
    Kernel::by_name(kernel);
}

KnRule RunConfig::kn_rule_enum() const {
    return kn_rule == "ceil" ? KnRule::Ceil : KnRule::Round;
}

VarianceMethod RunConfig::variance_enum() const {
    if (variance == "plugin") return VarianceMethod::Plugin;
    if (variance == "univariate") return VarianceMethod::Univariate;
    return VarianceMethod::Subsample;
}

SamplingScheme RunConfig::make_scheme() const {
    if (scheme == "subset") return SamplingScheme::subset(N, n1, n2);
    if (scheme == "shifted") return SamplingScheme::shifted(N, n1);
    return SamplingScheme::poisson(N, lambda1, lambda2);
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");

    static const std::set<std::string> known = {
        "theta",     "kn_rule",       "kernel",   "variance",        "varpi",
        "eta",       "spot_window",   "u_points", "ci_level",        "normalize_time",
        "joint_tolerance", "scheme",  "N",        "n1",              "n2",
        "lambda1",   "lambda2",       "gamma",    "ma_theta",        "reps",
        "calib_reps", "calib_rho",    "adjust_variance", "threads",
    };
    for (const auto& item : j.items()) {
        if (!known.count(item.key()))
            throw ValidationError("unknown config key '" + item.key() + "'");
    }

    RunConfig cfg;
    try {
        read_field(j, "theta", cfg.theta);
        read_field(j, "kn_rule", cfg.kn_rule);
        read_field(j, "kernel", cfg.kernel);
        read_field(j, "variance", cfg.variance);
        read_field(j, "varpi", cfg.varpi);
        read_field(j, "eta", cfg.eta);
        read_field(j, "spot_window", cfg.spot_window);
        read_field(j, "u_points", cfg.u_points);
        read_field(j, "ci_level", cfg.ci_level);
        read_field(j, "normalize_time", cfg.normalize_time);
        read_field(j, "joint_tolerance", cfg.joint_tolerance);
        read_field(j, "scheme", cfg.scheme);
        read_field(j, "N", cfg.N);
        read_field(j, "n1", cfg.n1);
        read_field(j, "n2", cfg.n2);
        read_field(j, "lambda1", cfg.lambda1);
        read_field(j, "lambda2", cfg.lambda2);
        read_field(j, "gamma", cfg.gamma);
        read_field(j, "ma_theta", cfg.ma_theta);
        read_field(j, "reps", cfg.reps);
        read_field(j, "calib_reps", cfg.calib_reps);
        read_field(j, "calib_rho", cfg.calib_rho);
        read_field(j, "adjust_variance", cfg.adjust_variance);
        read_field(j, "threads", cfg.threads);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config field has wrong type: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    json j;
    j["theta"] = cfg.theta;
    j["kn_rule"] = cfg.kn_rule;
    j["kernel"] = cfg.kernel;
    j["variance"] = cfg.variance;
    j["varpi"] = cfg.varpi;
    j["eta"] = cfg.eta;
    j["spot_window"] = cfg.spot_window;
    j["u_points"] = cfg.u_points;
    j["ci_level"] = cfg.ci_level;
    j["normalize_time"] = cfg.normalize_time;
    j["joint_tolerance"] = cfg.joint_tolerance;
    j["scheme"] = cfg.scheme;
    j["N"] = cfg.N;
    j["n1"] = cfg.n1;
    j["n2"] = cfg.n2;
    j["lambda1"] = cfg.lambda1;
    j["lambda2"] = cfg.lambda2;
    j["gamma"] = cfg.gamma;
    j["ma_theta"] = cfg.ma_theta;
    j["reps"] = cfg.reps;
    j["calib_reps"] = cfg.calib_reps;
    j["calib_rho"] = cfg.calib_rho;
    j["adjust_variance"] = cfg.adjust_variance;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";
}

} // namespace covest
