#include "survss/config.hpp"

#include "survss/error.hpp"
#include "survss/precision.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace survss {

namespace {

using json = nlohmann::json;

// Collects every validation problem keyed by JSON pointer.
class Checker {
public:
    void fail(const std::string& pointer, const std::string& message) {
        problems_.push_back((pointer.empty() ? "/" : pointer) + ": " + message);
    }
    bool ok() const { return problems_.empty(); }
    void raise() const {
        if (problems_.empty()) return;
        std::ostringstream os;
        os << "invalid configuration (" << problems_.size() << (problems_.size() == 1 ? " problem" : " problems") << ")";
        for (const auto& p : problems_) os << "\n  " << p;
        throw config_error(os.str());
    }

    const json* member(const json& obj, const std::string& ptr, const char* key, bool required) {
        if (!obj.is_object()) return nullptr;
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(ptr + "/" + key, "is required");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const std::string& ptr, const char* key, bool required) {
        const json* v = member(obj, ptr, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail(ptr + "/" + key, "must be a number");
            return std::nullopt;
        }
        const double d = v->get<double>();
        if (!std::isfinite(d)) {
            fail(ptr + "/" + key, "must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<double> in_range(const json& obj, const std::string& ptr, const char* key, bool required, double lo,
                                   double hi, bool open_lo, bool open_hi) {
        auto v = number(obj, ptr, key, required);
        if (!v) return v;
        const bool below = open_lo ? !(*v > lo) : !(*v >= lo);
        const bool above = open_hi ? !(*v < hi) : !(*v <= hi);
        if (below || above) {
            std::ostringstream os;
            os << "must be in " << (open_lo ? '(' : '[') << lo << ", " << hi << (open_hi ? ')' : ']') << ", got " << *v;
            fail(ptr + "/" + key, os.str());
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::uint64_t> seed(const json& obj, const std::string& ptr, const char* key) {
        const json* v = member(obj, ptr, key, false);
        if (!v) return std::nullopt;
        if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0)) {
            fail(ptr + "/" + key, "must be a non-negative integer");
            return std::nullopt;
        }
        return v->get<std::uint64_t>();
    }

    std::optional<std::string> string(const json& obj, const std::string& ptr, const char* key, bool required) {
        const json* v = member(obj, ptr, key, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(ptr + "/" + key, "must be a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<std::vector<std::string>> strings(const json& obj, const std::string& ptr, const char* key,
                                                    bool required) {
        const json* v = member(obj, ptr, key, required);
        if (!v) return std::nullopt;
        if (!v->is_array()) {
            fail(ptr + "/" + key, "must be an array of strings");
            return std::nullopt;
        }
        std::vector<std::string> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_string()) {
                fail(ptr + "/" + key + "/" + std::to_string(i), "must be a string");
                continue;
            }
            out.push_back((*v)[i].get<std::string>());
        }
        return out;
    }

    std::optional<std::vector<double>> numbers(const json& obj, const std::string& ptr, const char* key,
                                               bool required) {
        const json* v = member(obj, ptr, key, required);
        if (!v) return std::nullopt;
        if (!v->is_array()) {
            fail(ptr + "/" + key, "must be an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        bool good = true;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number() || !std::isfinite((*v)[i].get<double>())) {
                fail(ptr + "/" + key + "/" + std::to_string(i), "must be a finite number");
                good = false;
                continue;
            }
            out.push_back((*v)[i].get<double>());
        }
        if (!good) return std::nullopt;
        return out;
    }

    void unknown_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> known) {
        if (!obj.is_object()) return;
        std::set<std::string> allowed(known.begin(), known.end());
        for (const auto& [key, _] : obj.items())
            if (!allowed.count(key)) fail(ptr + "/" + key, "unknown key");
    }

    bool object(const json* v, const std::string& ptr) {
        if (!v) return false;
        if (!v->is_object()) {
            fail(ptr, "must be an object");
            return false;
        }
        return true;
    }

private:
    std::vector<std::string> problems_;
};

ColumnKind column_kind(Checker& chk, const std::string& ptr, const std::string& kind) {
    if (kind == "continuous") return ColumnKind::Continuous;
    if (kind == "binary") return ColumnKind::Binary;
    if (kind == "categorical") return ColumnKind::Categorical;
    chk.fail(ptr, "must be one of continuous, binary, categorical");
    return ColumnKind::Continuous;
}

std::optional<CsvSource> parse_csv(Checker& chk, const json& j, const std::string& ptr,
                                   const std::filesystem::path& base_dir) {
    if (!chk.object(&j, ptr)) return std::nullopt;
    chk.unknown_keys(j, ptr,
                     {"path", "predictors", "time_column", "event_column", "time_scale_divisor", "group_columns"});
    CsvSource src;
    if (auto p = chk.string(j, ptr, "path", true)) {
        std::filesystem::path path(*p);
        src.path = path.is_absolute() ? path : base_dir / path;
    }
    const json* preds = chk.member(j, ptr, "predictors", true);
    if (preds && (!preds->is_array() || preds->empty())) chk.fail(ptr + "/predictors", "must be a non-empty array");
    if (preds && preds->is_array()) {
        for (std::size_t i = 0; i < preds->size(); ++i) {
            const std::string pp = ptr + "/predictors/" + std::to_string(i);
            const json& pj = (*preds)[i];
            if (!chk.object(&pj, pp)) continue;
            chk.unknown_keys(pj, pp, {"name", "kind", "levels", "reference_level"});
            PredictorColumn col;
            if (auto n = chk.string(pj, pp, "name", true)) col.name = *n;
            if (auto k = chk.string(pj, pp, "kind", false)) col.kind = column_kind(chk, pp + "/kind", *k);
            if (auto l = chk.strings(pj, pp, "levels", false)) col.levels = *l;
            col.reference_level = chk.string(pj, pp, "reference_level", false);
            if (col.kind != ColumnKind::Categorical && (pj.contains("levels") || pj.contains("reference_level")))
                chk.fail(pp, "levels/reference_level apply only to categorical columns");
            src.schema.predictors.push_back(std::move(col));
        }
    }
    src.schema.time_column = chk.string(j, ptr, "time_column", false);
    src.schema.event_column = chk.string(j, ptr, "event_column", false);
    if (src.schema.time_column.has_value() != src.schema.event_column.has_value())
        chk.fail(ptr, "time_column and event_column must be given together");
    if (auto d = chk.in_range(j, ptr, "time_scale_divisor", false, 0.0, HUGE_VAL, true, true))
        src.schema.time_scale_divisor = *d;
    if (auto g = chk.strings(j, ptr, "group_columns", false)) src.schema.group_columns = *g;
    return src;
}

std::optional<SynthSource> parse_synth(Checker& chk, const json& j, const std::string& ptr) {
    if (!chk.object(&j, ptr)) return std::nullopt;
    chk.unknown_keys(j, ptr, {"n", "predictors"});
    SynthSource src;
    if (const json* n = chk.member(j, ptr, "n", true)) {
        if (!n->is_number_integer() || n->get<long long>() < 2)
            chk.fail(ptr + "/n", "must be an integer >= 2");
        else
            src.n = n->get<std::size_t>();
    }
    const json* preds = chk.member(j, ptr, "predictors", true);
    if (preds && (!preds->is_array() || preds->empty())) chk.fail(ptr + "/predictors", "must be a non-empty array");
    if (preds && preds->is_array()) {
        for (std::size_t i = 0; i < preds->size(); ++i) {
            const std::string pp = ptr + "/predictors/" + std::to_string(i);
            const json& pj = (*preds)[i];
            if (!chk.object(&pj, pp)) continue;
            PredictorDistribution pd;
            if (auto n = chk.string(pj, pp, "name", true)) pd.name = *n;
            const auto dist = chk.string(pj, pp, "distribution", true);
            if (!dist) continue;
            if (*dist == "normal") {
                chk.unknown_keys(pj, pp, {"name", "distribution", "mean", "sd"});
                NormalDist d;
                if (auto v = chk.number(pj, pp, "mean", true)) d.mean = *v;
                if (auto v = chk.in_range(pj, pp, "sd", true, 0.0, HUGE_VAL, true, true)) d.sd = *v;
                pd.distribution = d;
            } else if (*dist == "lognormal") {
                chk.unknown_keys(pj, pp, {"name", "distribution", "log_mean", "log_sd"});
                LogNormalDist d;
                if (auto v = chk.number(pj, pp, "log_mean", true)) d.log_mean = *v;
                if (auto v = chk.in_range(pj, pp, "log_sd", true, 0.0, HUGE_VAL, true, true)) d.log_sd = *v;
                pd.distribution = d;
            } else if (*dist == "bernoulli") {
                chk.unknown_keys(pj, pp, {"name", "distribution", "p"});
                BernoulliDist d;
                if (auto v = chk.in_range(pj, pp, "p", true, 0.0, 1.0, false, false)) d.p = *v;
                pd.distribution = d;
            } else if (*dist == "categorical") {
                chk.unknown_keys(pj, pp, {"name", "distribution", "levels", "probabilities", "reference_level"});
                CategoricalDist d;
                if (auto v = chk.strings(pj, pp, "levels", true)) d.levels = *v;
                if (auto v = chk.numbers(pj, pp, "probabilities", true)) d.probabilities = *v;
                d.reference_level = chk.string(pj, pp, "reference_level", false);
                if (d.levels.size() != d.probabilities.size())
                    chk.fail(pp, "levels and probabilities must have the same length");
                pd.distribution = d;
            } else {
                chk.fail(pp + "/distribution", "must be one of normal, lognormal, bernoulli, categorical");
                continue;
            }
            src.spec.predictors.push_back(std::move(pd));
        }
    }
    if (chk.ok()) {
        try {
            src.spec.validate();
        } catch (const Error& e) {
            chk.fail(ptr + "/predictors", e.what());
        }
    }
    return src;
}

std::optional<CensoringSpec> parse_censoring(Checker& chk, const json& j, const std::string& ptr) {
    if (!chk.object(&j, ptr)) return std::nullopt;
    const auto type = chk.string(j, ptr, "type", true);
    if (!type) return std::nullopt;
    if (*type == "none") {
        chk.unknown_keys(j, ptr, {"type"});
        return NoCensoring{};
    }
    if (*type == "exponential") {
        chk.unknown_keys(j, ptr, {"type", "rate"});
        ExponentialCensoring c;
        if (auto v = chk.in_range(j, ptr, "rate", true, 0.0, HUGE_VAL, true, true)) c.rate = *v;
        return c;
    }
    if (*type == "delayed_uniform") {
        chk.unknown_keys(j, ptr, {"type", "no_censor_before", "uniform_until", "administrative_max"});
        DelayedUniformCensoring c;
        auto a = chk.in_range(j, ptr, "no_censor_before", true, 0.0, HUGE_VAL, false, true);
        auto b = chk.in_range(j, ptr, "uniform_until", true, 0.0, HUGE_VAL, true, true);
        auto m = chk.in_range(j, ptr, "administrative_max", true, 0.0, HUGE_VAL, true, true);
        if (a) c.no_censor_before = *a;
        if (b) c.uniform_until = *b;
        if (m) c.administrative_max = *m;
        if (a && b && m) {
            try {
                validate(CensoringSpec{c});
            } catch (const Error& e) {
                chk.fail(ptr, e.what());
            }
        }
        return c;
    }
    chk.fail(ptr + "/type", "must be one of none, exponential, delayed_uniform");
    return std::nullopt;
}

std::optional<std::variant<DirectModel, CalibratedModel>> parse_core_model(Checker& chk, const json& j,
                                                                          const std::string& ptr) {
    if (!chk.object(&j, ptr)) return std::nullopt;
    const bool direct = j.contains("alpha") || j.contains("delta") || j.contains("beta");
    const bool calibrated = j.contains("calibrate");
    if (direct == calibrated) {
        chk.fail(ptr, "give either alpha/delta/beta or a calibrate block, not both or neither");
        return std::nullopt;
    }
    if (direct) {
        chk.unknown_keys(j, ptr, {"alpha", "delta", "beta"});
        DirectModel m;
        if (auto v = chk.number(j, ptr, "alpha", true)) m.alpha = *v;
        if (auto v = chk.number(j, ptr, "delta", false)) m.delta = *v;
        if (auto v = chk.numbers(j, ptr, "beta", true))
            m.beta = Eigen::Map<const Eigen::VectorXd>(v->data(), static_cast<Eigen::Index>(v->size()));
        return m;
    }
    chk.unknown_keys(j, ptr, {"calibrate"});
    const std::string cp = ptr + "/calibrate";
    const json& c = j["calibrate"];
    if (!chk.object(&c, cp)) return std::nullopt;
    chk.unknown_keys(c, cp,
                     {"overall_risk", "c_index", "beta_relative", "equal_standardized_weights", "tolerance_risk",
                      "tolerance_c", "max_iterations"});
    CalibratedModel m;
    if (auto v = chk.in_range(c, cp, "overall_risk", true, 0.0, 1.0, true, true)) m.target.overall_risk = *v;
    if (auto v = chk.in_range(c, cp, "c_index", true, 0.5, 1.0, false, true)) m.target.c_index = *v;
    if (auto v = chk.in_range(c, cp, "tolerance_risk", false, 0.0, 1.0, true, true)) m.target.tolerance_risk = *v;
    if (auto v = chk.in_range(c, cp, "tolerance_c", false, 0.0, 0.5, true, true)) m.target.tolerance_c = *v;
    if (const json* it = chk.member(c, cp, "max_iterations", false)) {
        if (!it->is_number_integer() || it->get<long long>() < 1)
            chk.fail(cp + "/max_iterations", "must be a positive integer");
        else
            m.target.max_iterations = it->get<int>();
    }
    const bool rel = c.contains("beta_relative");
    const bool eq = c.contains("equal_standardized_weights");
    if (rel == eq) chk.fail(cp, "give exactly one of beta_relative or equal_standardized_weights");
    if (rel)
        if (auto v = chk.numbers(c, cp, "beta_relative", true))
            m.beta_relative = Eigen::Map<const Eigen::VectorXd>(v->data(), static_cast<Eigen::Index>(v->size()));
    if (eq) {
        if (auto v = chk.numbers(c, cp, "equal_standardized_weights", true)) {
            std::vector<int> signs;
            for (std::size_t i = 0; i < v->size(); ++i) {
                if ((*v)[i] != 1.0 && (*v)[i] != -1.0)
                    chk.fail(cp + "/equal_standardized_weights/" + std::to_string(i), "must be 1 or -1");
                signs.push_back((*v)[i] > 0 ? 1 : -1);
            }
            m.equal_standardized_weights = std::move(signs);
        }
    }
    return m;
}

std::optional<PrecisionTargets> parse_targets(Checker& chk, const json& j, const std::string& ptr) {
    if (!chk.object(&j, ptr)) return std::nullopt;
    chk.unknown_keys(j, ptr, {"bins", "scope"});
    PrecisionTargets t;
    const json* bins = chk.member(j, ptr, "bins", true);
    if (bins && (!bins->is_array() || bins->empty())) chk.fail(ptr + "/bins", "must be a non-empty array");
    if (bins && bins->is_array()) {
        for (std::size_t i = 0; i < bins->size(); ++i) {
            const std::string bp = ptr + "/bins/" + std::to_string(i);
            const json& bj = (*bins)[i];
            if (!chk.object(&bj, bp)) continue;
            chk.unknown_keys(bj, bp, {"risk", "max_width"});
            WidthTarget w;
            auto r = chk.in_range(bj, bp, "risk", true, 0.0, 1.0, true, true);
            auto m = chk.in_range(bj, bp, "max_width", true, 0.0, 1.0, true, true);
            if (r) w.risk = *r;
            if (m) w.max_width = *m;
            if (r && !t.bins.empty() && !(w.risk > t.bins.back().risk))
                chk.fail(bp + "/risk", "bin risks must be strictly increasing");
            t.bins.push_back(w);
        }
    }
    if (const json* s = chk.member(j, ptr, "scope", false)) {
        const std::string sp = ptr + "/scope";
        if (chk.object(s, sp)) {
            chk.unknown_keys(*s, sp, {"min_true_risk", "max_true_risk", "group"});
            t.scope.min_true_risk = chk.in_range(*s, sp, "min_true_risk", false, 0.0, 1.0, false, false);
            t.scope.max_true_risk = chk.in_range(*s, sp, "max_true_risk", false, 0.0, 1.0, false, false);
            if (t.scope.min_true_risk && t.scope.max_true_risk && *t.scope.min_true_risk > *t.scope.max_true_risk)
                chk.fail(sp, "min_true_risk exceeds max_true_risk");
            if (const json* g = chk.member(*s, sp, "group", false)) {
                const std::string gp = sp + "/group";
                if (chk.object(g, gp)) {
                    chk.unknown_keys(*g, gp, {"column", "label"});
                    auto col = chk.string(*g, gp, "column", true);
                    auto lab = chk.string(*g, gp, "label", true);
                    if (col && lab) t.scope.group = std::make_pair(*col, *lab);
                }
            }
        }
    }
    return t;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> tokens;
    if (!path.empty() && path.front() == '/') {
        std::string rest = path.substr(1);
        std::string token;
        for (std::size_t i = 0; i <= rest.size(); ++i) {
            if (i == rest.size() || rest[i] == '/') {
                std::string t;
                for (std::size_t k = 0; k < token.size(); ++k) {
                    if (token[k] == '~' && k + 1 < token.size()) {
                        t += token[k + 1] == '1' ? '/' : '~';
                        ++k;
                    } else {
                        t += token[k];
                    }
                }
                tokens.push_back(t);
                token.clear();
            } else {
                token += rest[i];
            }
        }
        return tokens;
    }
    std::string token;
    for (char c : path) {
        if (c == '.') {
            tokens.push_back(token);
            token.clear();
        } else {
            token += c;
        }
    }
    tokens.push_back(token);
    return tokens;
}

}  // namespace

double RunConfig::multiplier() const { return z_multiplier.value_or(normal_multiplier(level)); }

nlohmann::json read_config_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void apply_override(nlohmann::json& document, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw config_error("override '" + assignment + "' is not path=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    const auto tokens = split_path(path);
    json* node = &document;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        const auto& t = tokens[k];
        if (t.empty()) throw config_error("override '" + assignment + "' has an empty path segment");
        const bool last = k + 1 == tokens.size();
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                idx = std::stoul(t, &used);
                if (used != t.size()) throw std::invalid_argument(t);
            } catch (const std::exception&) {
                throw config_error("override '" + assignment + "': '" + t + "' is not an array index");
            }
            if (idx > node->size()) throw config_error("override '" + assignment + "': index " + t + " out of range");
            if (idx == node->size()) node->push_back(nullptr);
            node = &(*node)[idx];
        } else {
            if (node->is_null()) *node = json::object();
            if (!node->is_object())
                throw config_error("override '" + assignment + "': '" + t + "' descends into a scalar");
            node = &(*node)[t];
        }
        if (last) *node = value;
    }
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw numerical_error("SHA-256 digest failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

nlohmann::json to_json(const CensoringSpec& spec) {
    return std::visit(
        [](const auto& c) -> json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NoCensoring>)
                return {{"type", "none"}};
            else if constexpr (std::is_same_v<T, ExponentialCensoring>)
                return {{"type", "exponential"}, {"rate", c.rate}};
            else
                return {{"type", "delayed_uniform"},
                        {"no_censor_before", c.no_censor_before},
                        {"uniform_until", c.uniform_until},
                        {"administrative_max", c.administrative_max}};
        },
        spec);
}

RunConfig parse_config(const nlohmann::json& document, const std::filesystem::path& base_dir) {
    Checker chk;
    RunConfig cfg;
    if (!document.is_object()) {
        chk.fail("", "configuration must be a JSON object");
        chk.raise();
    }
    chk.unknown_keys(document, "",
                     {"data", "standardize", "core_model", "horizon", "censoring", "sample_sizes", "precision_targets",
                      "thresholds", "level", "z_multiplier", "mape_draws", "lowess_bandwidth", "subgroup_flag_factor",
                      "seed", "output_dir", "description"});

    if (const json* data = chk.member(document, "", "data", true); chk.object(data, "/data")) {
        const bool csv = data->contains("csv");
        const bool synth = data->contains("synth");
        chk.unknown_keys(*data, "/data", {"csv", "synth"});
        if (csv == synth) {
            chk.fail("/data", "give exactly one data source: csv or synth");
        } else if (csv) {
            if (auto s = parse_csv(chk, (*data)["csv"], "/data/csv", base_dir)) cfg.data = std::move(*s);
        } else {
            if (auto s = parse_synth(chk, (*data)["synth"], "/data/synth")) cfg.data = std::move(*s);
        }
    }
    if (auto s = chk.strings(document, "", "standardize", false)) cfg.standardize = *s;
    if (const json* m = chk.member(document, "", "core_model", true))
        if (auto model = parse_core_model(chk, *m, "/core_model")) cfg.core_model = std::move(*model);
    if (auto h = chk.in_range(document, "", "horizon", true, 0.0, HUGE_VAL, true, true)) cfg.horizon = *h;
    if (const json* c = chk.member(document, "", "censoring", false)) cfg.censoring = parse_censoring(chk, *c, "/censoring");

    if (auto sizes = chk.numbers(document, "", "sample_sizes", false)) {
        for (std::size_t i = 0; i < sizes->size(); ++i)
            if (!((*sizes)[i] >= 1.0)) chk.fail("/sample_sizes/" + std::to_string(i), "must be >= 1");
        cfg.sample_sizes = *sizes;
    }
    if (const json* t = chk.member(document, "", "precision_targets", false))
        cfg.precision_targets = parse_targets(chk, *t, "/precision_targets");
    if (cfg.sample_sizes.empty() && !cfg.precision_targets)
        chk.fail("", "give at least one of sample_sizes (non-empty) or precision_targets");

    if (auto t = chk.numbers(document, "", "thresholds", false)) {
        for (std::size_t i = 0; i < t->size(); ++i)
            if (!((*t)[i] > 0.0 && (*t)[i] < 1.0)) chk.fail("/thresholds/" + std::to_string(i), "must be in (0, 1)");
        cfg.thresholds = *t;
    }
    if (auto v = chk.in_range(document, "", "level", false, 0.0, 1.0, true, true)) cfg.level = *v;
    cfg.z_multiplier = chk.in_range(document, "", "z_multiplier", false, 0.0, HUGE_VAL, true, true);
    if (const json* d = chk.member(document, "", "mape_draws", false)) {
        if (!d->is_number_integer() || d->get<long long>() < 1)
            chk.fail("/mape_draws", "must be a positive integer");
        else
            cfg.mape_draws = d->get<int>();
    }
    if (auto v = chk.in_range(document, "", "lowess_bandwidth", false, 0.0, 1.0, true, false)) cfg.lowess_bandwidth = *v;
    if (auto v = chk.in_range(document, "", "subgroup_flag_factor", false, 0.0, HUGE_VAL, true, true))
        cfg.subgroup_flag_factor = *v;
    if (const json* s = chk.member(document, "", "seed", false); chk.object(s, "/seed")) {
        chk.unknown_keys(*s, "/seed", {"calibration", "simulation", "mape"});
        if (auto v = chk.seed(*s, "/seed", "calibration")) cfg.seeds.calibration = *v;
        if (auto v = chk.seed(*s, "/seed", "simulation")) cfg.seeds.simulation = *v;
        if (auto v = chk.seed(*s, "/seed", "mape")) cfg.seeds.mape = *v;
    }
    if (auto o = chk.string(document, "", "output_dir", false)) cfg.output_dir = *o;
    chk.raise();

    cfg.document = document;
    cfg.hash = sha256_hex(document.dump());
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json document = read_config_json(path);
    for (const auto& o : overrides) apply_override(document, o);
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_config(document, base);
}

}  // namespace survss
