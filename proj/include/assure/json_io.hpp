// json_io.hpp
//
// JSON schemas for family configs, scenarios and reports, plus a writer that
// prints every double with 17 significant digits.
#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "assure/baselines.hpp"
#include "assure/classes.hpp"
#include "assure/detail/format.hpp"
#include "assure/error.hpp"
#include "assure/estimators.hpp"
#include "assure/optimize.hpp"
#include "assure/sim.hpp"

namespace assure {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Writer

namespace detail {

inline void write_json_string(std::ostream& out, const std::string& s) {
    out << Json(s).dump();
}

inline void write_json(std::ostream& out, const Json& j, int indent, int level) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
    const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out << "{}";
            return;
        }
        out << '{' << nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                out << ',' << nl;
            first = false;
            out << pad;
            write_json_string(out, it.key());
            out << (indent > 0 ? ": " : ":");
            write_json(out, it.value(), indent, level + 1);
        }
        out << nl << close_pad << '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out << "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        bool scalars = true;
        for (const auto& v : j)
            scalars = scalars && !v.is_structured();
        if (scalars) {
            out << '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    out << (indent > 0 ? ", " : ",");
                write_json(out, j[i], indent, level + 1);
            }
            out << ']';
            return;
        }
        out << '[' << nl;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i)
                out << ',' << nl;
            out << pad;
            write_json(out, j[i], indent, level + 1);
        }
        out << nl << close_pad << ']';
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v))
            out << "null";
        else
            out << format_double(v);
        return;
    }
    default:
        out << j.dump();
        return;
    }
}

} // namespace detail

/// Serializes with doubles at 17 significant digits; non-finite doubles become null.
inline std::string dump_json(const Json& j, int indent = 2) {
    std::ostringstream out;
    detail::write_json(out, j, indent, 0);
    return out.str();
}

inline Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("invalid_json", 0, what + ": " + e.what());
    }
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("io", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string& detail) { throw ParseError("invalid_config", 0, detail); }

inline double number_field(const Json& j, const char* key, double fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number())
        schema_error(std::string("field '") + key + "' must be a number");
    const double v = j[key].get<double>();
    if (!std::isfinite(v))
        schema_error(std::string("field '") + key + "' must be finite");
    return v;
}

inline std::string string_field(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        schema_error(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
}

inline std::size_t count_field(const Json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
        schema_error(std::string("field '") + key + "' must be a non-negative integer");
    return j[key].get<std::size_t>();
}

inline Json point_json(std::span<const double> beta) {
    Json a = Json::array();
    for (double b : beta)
        a.push_back(b);
    return a;
}

inline ParamPoint point_from_json(const Json& j, const char* what) {
    if (!j.is_array())
        schema_error(std::string(what) + " must be an array of numbers");
    ParamPoint p;
    for (const auto& v : j) {
        if (!v.is_number())
            schema_error(std::string(what) + " must be an array of numbers");
        p.push_back(v.get<double>());
    }
    return p;
}

inline Box box_from_json(const Json& j) {
    if (!j.is_array())
        schema_error("'box' must be an array of [lo, hi] or [lo, hi, \"log\"] entries");
    Box box;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number() || !e[1].is_number())
            schema_error("'box' entries must be [lo, hi] or [lo, hi, \"log\"]");
        Interval iv{e[0].get<double>(), e[1].get<double>(), false};
        if (e.size() == 3) {
            if (!e[2].is_string() || (e[2] != "log" && e[2] != "linear"))
                schema_error("box scale tag must be \"log\" or \"linear\"");
            iv.log_scale = e[2] == "log";
        }
        box.push_back(iv);
    }
    return box;
}

} // namespace detail

inline Json box_to_json(const Box& box) {
    Json a = Json::array();
    for (const auto& iv : box) {
        Json e = Json::array({iv.lo, iv.hi});
        if (iv.log_scale)
            e.push_back("log");
        a.push_back(e);
    }
    return a;
}

// ---------------------------------------------------------------------------
// Family config
//
//   {"kind": "threshold" | "tstat" | "linear_shrink" | "fay_herriot" |
//            "close_gauss" | "ensemble" | "finite",
//    "box": [[lo, hi], [lo, hi, "log"], ...],            optional
//    "rules": [{"family": {...}, "beta": [...]}, ...]}   finite only
//
// fay_herriot takes its covariate dimension from the dataset; ensemble
// components are fitted on the dataset (leave-one-out).

inline DecisionFamily family_from_json(const Json& j, const Dataset* data = nullptr) {
    if (!j.is_object())
        detail::schema_error("family config must be a JSON object");
    const FamilyKind kind = family_kind_from_string(detail::string_field(j, "kind"));
    const bool has_box = j.contains("box");
    const Box box = has_box ? detail::box_from_json(j["box"]) : Box{};
    auto require_entries = [&](std::size_t want) {
        if (has_box && box.size() != want)
            detail::schema_error(std::string(to_string(kind)) + " box needs " + std::to_string(want) + " interval(s), got " +
                                 std::to_string(box.size()));
    };
    switch (kind) {
    case FamilyKind::threshold:
    case FamilyKind::tstat: require_entries(1); break;
    case FamilyKind::linear_shrink: require_entries(2); break;
    case FamilyKind::close_gauss: require_entries(4); break;
    default: break;
    }
    switch (kind) {
    case FamilyKind::threshold: return has_box ? DecisionFamily::threshold(box.at(0)) : DecisionFamily::threshold();
    case FamilyKind::tstat: return has_box ? DecisionFamily::tstat(box.at(0)) : DecisionFamily::tstat();
    case FamilyKind::linear_shrink: return has_box ? DecisionFamily::linear_shrink(box) : DecisionFamily::linear_shrink();
    case FamilyKind::close_gauss: return has_box ? DecisionFamily::close_gauss(box) : DecisionFamily::close_gauss();
    case FamilyKind::fay_herriot: {
        if (has_box && box.size() < 2)
            detail::schema_error("fay_herriot box needs the variance interval plus one interval per covariate");
        std::size_t p = has_box ? box.size() - 1 : 0;
        if (!has_box) {
            if (j.contains("covariate_dim"))
                p = detail::count_field(j, "covariate_dim", 0);
            else if (data)
                p = data->covariate_dim();
        }
        if (data && p != data->covariate_dim())
            throw PreconditionError("fay_herriot family expects " + std::to_string(p) + " covariates, dataset has " +
                                        std::to_string(data->covariate_dim()),
                                    "covariate_dimension");
        return DecisionFamily::fay_herriot(p, box);
    }
    case FamilyKind::ensemble: {
        if (!data)
            throw PreconditionError("the ensemble family is fitted on a dataset; none given", "ensemble_index");
        if (has_box && box.size() != 1)
            detail::schema_error("ensemble box must have exactly one [lo, hi] entry");
        return fit_ensemble_family(*data, has_box ? box[0] : Interval{0.01, 1.0, false});
    }
    case FamilyKind::finite: {
        if (!j.contains("rules") || !j["rules"].is_array())
            detail::schema_error("finite family needs a 'rules' array");
        std::vector<FiniteRule> rules;
        for (const auto& r : j["rules"]) {
            if (!r.is_object() || !r.contains("family") || !r.contains("beta"))
                detail::schema_error("finite rules need 'family' and 'beta'");
            auto fam = std::make_shared<const DecisionFamily>(family_from_json(r["family"], data));
            if (fam->kind() == FamilyKind::finite)
                detail::schema_error("finite rules cannot nest finite families");
            rules.push_back({std::move(fam), detail::point_from_json(r["beta"], "rule beta")});
        }
        return DecisionFamily::finite(std::move(rules));
    }
    }
    detail::schema_error("unknown family kind");
}

inline Json family_to_json(const DecisionFamily& f) {
    Json j;
    j["kind"] = to_string(f.kind());
    if (f.kind() == FamilyKind::finite) {
        Json rules = Json::array();
        for (const auto& r : *f.finite_rules())
            rules.push_back({{"family", family_to_json(*r.family)}, {"beta", detail::point_json(r.beta)}});
        j["rules"] = rules;
    } else {
        j["box"] = box_to_json(f.box());
    }
    return j;
}

/// A plug-in fit in the family-config schema, with its parameter point.
inline Json plugin_to_json(const DecisionFamily& f, const PluginFit& fit) {
    Json j = family_to_json(f);
    j["beta"] = detail::point_json(fit.beta);
    j["estimator"] = "method_of_moments";
    j["flags"] = fit.flags;
    return j;
}

/// Parses "b1,b2,..." into a parameter point.
inline ParamPoint parse_point(const std::string& text) {
    ParamPoint p;
    std::string_view rest = text;
    while (true) {
        const auto pos = rest.find(',');
        const auto field = rest.substr(0, pos);
        const auto v = detail::parse_double(field);
        if (!v)
            throw PreconditionError("cannot parse '" + std::string(detail::trim(field)) + "' as a finite number",
                                    "invalid_number");
        p.push_back(*v);
        if (pos == std::string_view::npos)
            break;
        rest = rest.substr(pos + 1);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Scenario
//
//   {"n": 1000, "reps": 40, "seed": 1, "mode": "gaussian",
//    "generator": {"kind": "two_point", "h": 1, "sign": 1}
//               | {"kind": "gaussian_prior", "mean": 0, "sd": 1}
//               | {"kind": "lognormal_prior", "mean": 0, "sd": 1}
//               | {"kind": "bimodal", "a": 1, "weight": 0.5, "center": 0}
//               | {"kind": "from_file", "path": "units.csv"},          column mu
//    "sigma": {"kind": "constant", "value": 1} | {"kind": "lognormal", "meanlog": 0, "sdlog": 0.5}
//           | {"kind": "from_file", "path": ...},                       column sigma
//    "cost": {"kind": "constant", "value": 0} | {"kind": "from_file", "path": ...},   column k
//    "covariates": {"kind": "none" | "mu_plus_t_noise" | "pure_noise", "scale": 1, "df": 10},
//    "misspec": {"kind": "none" | "student_t", "df": 10},
//    "redraw_mu": false,
//    "methods": ["assure:threshold", "plugin:linear_shrink", "success_rule", "pvalue:0.05", ...],
//    "boxes": {"threshold": [[-10, 10]], ...},
//    "optimizer": {"grid_size": 201, "starts": 8, "polish": true},
//    "h": 0.3, "eps": 0.2}                                               optional overrides
//
// File paths are resolved against `base_dir`.

namespace detail {

inline std::vector<double> csv_column_values(const std::string& path, const char* column) {
    std::ifstream in(path);
    if (!in)
        throw Error("io", "cannot open '" + path + "'");
    const CsvTable t = read_csv(in);
    const std::size_t c = t.require_column(column);
    std::vector<double> v;
    for (const auto& row : t.rows)
        v.push_back(row[c]);
    return v;
}

inline std::string resolve(const std::string& base_dir, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty())
        return path;
    return (std::filesystem::path(base_dir) / p).string();
}

} // namespace detail

inline ScenarioSpec scenario_from_json(const Json& j, const std::string& base_dir = "") {
    using detail::number_field;
    if (!j.is_object())
        detail::schema_error("scenario must be a JSON object");
    ScenarioSpec s;
    s.n = detail::count_field(j, "n", s.n);
    s.reps = detail::count_field(j, "reps", s.reps);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            detail::schema_error("'seed' must be a non-negative integer");
        if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0)
            detail::schema_error("'seed' must be a non-negative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("mode")) {
        const auto m = detail::string_field(j, "mode");
        if (m == "gaussian")
            s.mode = Likelihood::gaussian;
        else if (m == "poisson")
            s.mode = Likelihood::poisson;
        else
            detail::schema_error("'mode' must be gaussian or poisson");
    }
    if (j.contains("generator")) {
        const auto& g = j["generator"];
        const auto kind = detail::string_field(g, "kind");
        auto& G = s.generator;
        if (kind == "two_point") {
            G.kind = GeneratorSpec::Kind::two_point;
            G.h = number_field(g, "h", 1.0);
            G.sign = number_field(g, "sign", 1.0) < 0.0 ? -1.0 : 1.0;
        } else if (kind == "gaussian_prior" || kind == "lognormal_prior") {
            G.kind = kind == "gaussian_prior" ? GeneratorSpec::Kind::gaussian_prior : GeneratorSpec::Kind::lognormal_prior;
            G.mean = number_field(g, "mean", 0.0);
            G.sd = number_field(g, "sd", 1.0);
        } else if (kind == "bimodal") {
            G.kind = GeneratorSpec::Kind::bimodal;
            G.a = number_field(g, "a", 1.0);
            G.weight = number_field(g, "weight", 0.5);
            G.center = number_field(g, "center", 0.0);
        } else if (kind == "from_file") {
            G.kind = GeneratorSpec::Kind::from_file;
            G.values = detail::csv_column_values(detail::resolve(base_dir, detail::string_field(g, "path")), "mu");
            if (!j.contains("n"))
                s.n = G.values.size();
        } else {
            detail::schema_error("unknown generator kind '" + kind + "'");
        }
    }
    if (j.contains("sigma")) {
        const auto& g = j["sigma"];
        const auto kind = detail::string_field(g, "kind");
        if (kind == "constant") {
            s.sigma.kind = SigmaSpec::Kind::constant;
            s.sigma.value = number_field(g, "value", 1.0);
        } else if (kind == "lognormal") {
            s.sigma.kind = SigmaSpec::Kind::lognormal;
            s.sigma.meanlog = number_field(g, "meanlog", 0.0);
            s.sigma.sdlog = number_field(g, "sdlog", 0.5);
        } else if (kind == "from_file") {
            s.sigma.kind = SigmaSpec::Kind::from_file;
            s.sigma.values = detail::csv_column_values(detail::resolve(base_dir, detail::string_field(g, "path")), "sigma");
        } else {
            detail::schema_error("unknown sigma kind '" + kind + "'");
        }
    }
    if (j.contains("cost")) {
        const auto& g = j["cost"];
        const auto kind = detail::string_field(g, "kind");
        if (kind == "constant") {
            s.cost.kind = CostSpec::Kind::constant;
            s.cost.value = number_field(g, "value", 0.0);
        } else if (kind == "from_file") {
            s.cost.kind = CostSpec::Kind::from_file;
            s.cost.values = detail::csv_column_values(detail::resolve(base_dir, detail::string_field(g, "path")), "k");
        } else {
            detail::schema_error("unknown cost kind '" + kind + "'");
        }
    }
    if (j.contains("covariates")) {
        const auto& g = j["covariates"];
        const auto kind = detail::string_field(g, "kind");
        if (kind == "none")
            s.covariates.kind = CovariateSpec::Kind::none;
        else if (kind == "mu_plus_t_noise")
            s.covariates.kind = CovariateSpec::Kind::mu_plus_t_noise;
        else if (kind == "pure_noise")
            s.covariates.kind = CovariateSpec::Kind::pure_noise;
        else
            detail::schema_error("unknown covariate kind '" + kind + "'");
        s.covariates.scale = number_field(g, "scale", 1.0);
        s.covariates.df = static_cast<int>(detail::count_field(g, "df", 10));
    }
    if (j.contains("misspec")) {
        const auto& g = j["misspec"];
        const auto kind = detail::string_field(g, "kind");
        if (kind == "none")
            s.misspec.kind = MisspecSpec::Kind::none;
        else if (kind == "student_t")
            s.misspec.kind = MisspecSpec::Kind::student_t;
        else
            detail::schema_error("unknown misspec kind '" + kind + "'");
        s.misspec.df = static_cast<int>(detail::count_field(g, "df", 10));
    }
    if (j.contains("redraw_mu")) {
        if (!j["redraw_mu"].is_boolean())
            detail::schema_error("'redraw_mu' must be a boolean");
        s.redraw_mu = j["redraw_mu"].get<bool>();
    }
    if (j.contains("methods")) {
        if (!j["methods"].is_array())
            detail::schema_error("'methods' must be an array of method ids");
        for (const auto& m : j["methods"]) {
            if (!m.is_string())
                detail::schema_error("'methods' must be an array of method ids");
            s.methods.push_back(m.get<std::string>());
        }
    }
    if (j.contains("boxes")) {
        if (!j["boxes"].is_object())
            detail::schema_error("'boxes' must map family kinds to boxes");
        for (auto it = j["boxes"].begin(); it != j["boxes"].end(); ++it)
            s.boxes[family_kind_from_string(it.key())] = detail::box_from_json(it.value());
    }
    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        s.optimizer.grid_size = detail::count_field(o, "grid_size", s.optimizer.grid_size);
        s.optimizer.starts = detail::count_field(o, "starts", s.optimizer.starts);
        if (o.contains("polish")) {
            if (!o["polish"].is_boolean())
                detail::schema_error("'optimizer.polish' must be a boolean");
            s.optimizer.polish = o["polish"].get<bool>();
        }
    }
    if (j.contains("h"))
        s.h = number_field(j, "h", 0.0);
    if (j.contains("eps"))
        s.eps = number_field(j, "eps", 0.0);
    for (const auto& m : s.methods)
        parse_method(m);
    s.validate();
    return s;
}

inline ScenarioSpec load_scenario_file(const std::string& path) {
    const auto dir = std::filesystem::path(path).parent_path().string();
    return scenario_from_json(load_json_file(path), dir);
}

inline Json scenario_to_json(const ScenarioSpec& s) {
    Json j;
    j["n"] = s.n;
    j["reps"] = s.reps;
    j["seed"] = s.seed;
    j["mode"] = to_string(s.mode);
    Json g;
    switch (s.generator.kind) {
    case GeneratorSpec::Kind::two_point: g = {{"kind", "two_point"}, {"h", s.generator.h}, {"sign", s.generator.sign}}; break;
    case GeneratorSpec::Kind::gaussian_prior:
        g = {{"kind", "gaussian_prior"}, {"mean", s.generator.mean}, {"sd", s.generator.sd}};
        break;
    case GeneratorSpec::Kind::lognormal_prior:
        g = {{"kind", "lognormal_prior"}, {"mean", s.generator.mean}, {"sd", s.generator.sd}};
        break;
    case GeneratorSpec::Kind::bimodal:
        g = {{"kind", "bimodal"}, {"a", s.generator.a}, {"weight", s.generator.weight}, {"center", s.generator.center}};
        break;
    case GeneratorSpec::Kind::from_file: g = {{"kind", "from_file"}, {"values", s.generator.values.size()}}; break;
    }
    j["generator"] = g;
    switch (s.sigma.kind) {
    case SigmaSpec::Kind::constant: j["sigma"] = {{"kind", "constant"}, {"value", s.sigma.value}}; break;
    case SigmaSpec::Kind::lognormal:
        j["sigma"] = {{"kind", "lognormal"}, {"meanlog", s.sigma.meanlog}, {"sdlog", s.sigma.sdlog}};
        break;
    case SigmaSpec::Kind::from_file: j["sigma"] = {{"kind", "from_file"}}; break;
    }
    j["cost"] = s.cost.kind == CostSpec::Kind::constant ? Json{{"kind", "constant"}, {"value", s.cost.value}}
                                                         : Json{{"kind", "from_file"}};
    const char* ck = s.covariates.kind == CovariateSpec::Kind::none              ? "none"
                     : s.covariates.kind == CovariateSpec::Kind::mu_plus_t_noise ? "mu_plus_t_noise"
                                                                                 : "pure_noise";
    j["covariates"] = {{"kind", ck}, {"scale", s.covariates.scale}, {"df", s.covariates.df}};
    j["misspec"] = {{"kind", s.misspec.kind == MisspecSpec::Kind::none ? "none" : "student_t"}, {"df", s.misspec.df}};
    j["redraw_mu"] = s.redraw_mu;
    j["methods"] = s.methods;
    if (!s.boxes.empty()) {
        Json b;
        for (const auto& [k, box] : s.boxes)
            b[to_string(k)] = box_to_json(box);
        j["boxes"] = b;
    }
    j["optimizer"] = {{"grid_size", s.optimizer.grid_size}, {"starts", s.optimizer.starts}, {"polish", s.optimizer.polish}};
    if (s.h)
        j["h"] = *s.h;
    if (s.eps)
        j["eps"] = *s.eps;
    return j;
}

// ---------------------------------------------------------------------------
// Results

inline Json estimate_to_json(const WelfareEstimate& e) {
    return {{"value", e.value}, {"std_error", e.std_error}, {"n", e.n}, {"h", e.h}};
}

inline Json optimization_to_json(const OptimizationResult& r) {
    Json j;
    j["beta_hat"] = detail::point_json(r.beta_hat);
    j["value"] = r.value;
    j["std_error"] = r.std_error;
    j["evaluations"] = r.evaluations;
    j["warning"] = r.warning;
    if (!r.trace.empty()) {
        Json t = Json::array();
        for (const auto& p : r.trace)
            t.push_back({{"beta", detail::point_json(p.beta)}, {"value", p.value}});
        j["trace"] = t;
    }
    return j;
}

inline Json summary_to_json(const SummaryStats& s) {
    return {{"mean", s.mean}, {"std_error", s.std_error}, {"q05", s.q05}, {"q50", s.q50}, {"q95", s.q95}};
}

inline Json report_to_json(const SimReport& r) {
    Json j;
    j["scenario"] = scenario_to_json(r.spec);
    j["bandwidth"] = r.bandwidth;
    Json methods = Json::array();
    for (const auto& m : r.methods) {
        Json mj;
        mj["id"] = m.method.id;
        mj["family"] = to_string(m.method.family);
        if (m.oracle)
            mj["oracle"] = {{"beta", detail::point_json(m.oracle->beta)}, {"welfare", m.oracle->welfare}};
        else
            mj["oracle"] = nullptr;
        mj["summary"] = {{"welfare", summary_to_json(m.welfare)},
                         {"utility", summary_to_json(m.utility)},
                         {"regret", summary_to_json(m.regret)}};
        Json reps = Json::array();
        for (const auto& row : m.reps) {
            Json rj;
            rj["rep"] = row.rep;
            rj["beta_hat"] = detail::point_json(row.beta_hat);
            rj["welfare"] = row.welfare;
            rj["utility"] = row.utility;
            rj["regret"] = row.regret;
            rj["oracle_welfare"] = row.oracle_welfare;
            rj["estimate"] = row.estimate;
            rj["estimate_at_plugin"] = row.estimate_at_plugin;
            rj["warning"] = row.warning;
            reps.push_back(rj);
        }
        mj["reps"] = reps;
        methods.push_back(mj);
    }
    j["methods"] = methods;
    j["unavailable"] = r.unavailable;
    return j;
}

/// Flat per-rep CSV: method,rep,welfare,utility,regret,oracle_welfare,estimate,beta
/// (beta coordinates joined by ';').
inline void write_report_csv(std::ostream& out, const SimReport& r) {
    out << "method,rep,welfare,utility,regret,oracle_welfare,estimate,beta\n";
    for (const auto& m : r.methods)
        for (const auto& row : m.reps) {
            out << m.method.id << ',' << row.rep << ',' << detail::format_double(row.welfare) << ','
                << detail::format_double(row.utility) << ',' << detail::format_double(row.regret) << ','
                << detail::format_double(row.oracle_welfare) << ','
                << (std::isfinite(row.estimate) ? detail::format_double(row.estimate) : "") << ',';
            for (std::size_t k = 0; k < row.beta_hat.size(); ++k)
                out << (k ? ";" : "") << detail::format_double(row.beta_hat[k]);
            out << '\n';
        }
}

inline Json rate_table_to_json(const RateTable& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"n", r.n}, {"mean", r.mean}, {"std_error", r.std_error}});
    return {{"rows", rows}, {"slope", t.slope}, {"slope_std_error", t.slope_std_error}};
}

} // namespace assure
