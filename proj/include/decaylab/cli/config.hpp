#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <toml.hpp>

#include "decaylab/decay.hpp"
#include "decaylab/kernels/walk.hpp"
#include "decaylab/timestep.hpp"

namespace decaylab {

// Experiment configs are flat TOML documents: one key per parameter at the top
// level, so a sweep can address any of them as `--set key=v1,v2`. A key the
// chosen kind/operator does not use is an error, not a silent no-op.

enum class ExperimentKind { evolution, catalog_check, recurrence, kernel_validate };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::evolution: return "evolution";
        case ExperimentKind::catalog_check: return "catalog-check";
        case ExperimentKind::recurrence: return "recurrence";
        case ExperimentKind::kernel_validate: return "kernel-validate";
    }
    return "?";
}

struct InitialDatum {
    enum class Kind { sine, bump, random, file } kind = Kind::sine;
    int k = 1;
    std::vector<double> center;  // one entry per axis
    double width = 0.5;
    std::uint64_t seed = 1;
    double lo = -1.0, hi = 1.0;  // random values are uniform on (lo, hi)
    std::string path;
};

struct RecurrenceConfig {
    int n = 1;
    double s = 0.5;
    double rho = 0.1;
    int K = 100000;
    long trials = 0;  // 0 skips the Monte Carlo walk
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::evolution;
    std::uint64_t seed = 1;
    std::string out;
    bool svg = true;
    int sweep_budget = 64;

    std::optional<OperatorSpec> spec;
    TimeScheme scheme;
    bool dt_auto = false;
    Grid grid;
    InitialDatum initial;
    std::vector<double> ells{2.0};
    double tol = default_rate_tolerance;
    std::optional<FitWindow> fit_window;
    int dimension = 1;
    double dense_until = 1.0;
    double sample_ratio = 1.05;

    RecurrenceConfig recurrence;

    /// The parsed document, kept so sweeps can override keys and re-validate.
    toml::table source;
};

struct FieldError {
    std::string field;
    std::string message;
};

class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<FieldError> errors)
        : std::invalid_argument(join(errors)), errors_(std::move(errors)) {}
    const std::vector<FieldError>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<FieldError>& errors) {
        std::string s;
        for (const auto& e : errors) s += (s.empty() ? "" : "\n") + e.field + ": " + e.message;
        return s;
    }
    std::vector<FieldError> errors_;
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const toml::table& t) : t_(t) {}

    std::vector<FieldError> errors;

    bool has(const std::string& key) const { return t_.contains(key); }

    void error(const std::string& field, const std::string& message) { errors.push_back({field, message}); }

    std::optional<double> number(const std::string& key) {
        const toml::node* n = use(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) return *v;
        error(key, "must be a number");
        return std::nullopt;
    }

    double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

    double required_number(const std::string& key, const std::string& why) {
        if (!has(key)) {
            error(key, "is required " + why);
            return std::numeric_limits<double>::quiet_NaN();
        }
        return number(key).value_or(std::numeric_limits<double>::quiet_NaN());
    }

    std::optional<std::int64_t> integer(const std::string& key) {
        const toml::node* n = use(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<std::int64_t>(); v && n->is_integer()) return *v;
        error(key, "must be an integer");
        return std::nullopt;
    }

    std::optional<std::string> string(const std::string& key) {
        const toml::node* n = use(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<std::string>()) return *v;
        error(key, "must be a string");
        return std::nullopt;
    }

    std::optional<bool> boolean(const std::string& key) {
        const toml::node* n = use(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<bool>()) return *v;
        error(key, "must be true or false");
        return std::nullopt;
    }

    /// A number or an array of numbers.
    std::optional<std::vector<double>> numbers(const std::string& key) {
        const toml::node* n = use(key);
        if (!n) return std::nullopt;
        if (n->is_number()) return std::vector<double>{*n->value<double>()};
        if (const auto* a = n->as_array()) {
            std::vector<double> out;
            for (const auto& e : *a) {
                if (!e.is_number()) {
                    error(key, "must be a number or an array of numbers");
                    return std::nullopt;
                }
                out.push_back(*e.value<double>());
            }
            return out;
        }
        error(key, "must be a number or an array of numbers");
        return std::nullopt;
    }

    const toml::node* raw(const std::string& key) { return use(key); }

    void reject_unused(const std::string& context) {
        for (const auto& [k, v] : t_) {
            const std::string key(k.str());
            if (!used_.count(key)) error(key, "unknown key or not used by " + context);
        }
    }

private:
    const toml::node* use(const std::string& key) {
        used_.insert(key);
        return t_.get(key);
    }
    const toml::table& t_;
    std::set<std::string> used_;
};

/// Attributes a validate() message like "s must lie in (0,1)" to its key.
inline std::string field_of(const std::string& message, const std::string& fallback) {
    static const std::vector<std::pair<std::string, std::string>> prefixes{
        {"s ", "s"},           {"p ", "p"},         {"m ", "m"},           {"alpha ", "alpha"},
        {"lambda1 ", "lambda1"}, {"dt ", "dt"},       {"dt_growth ", "dt_growth"}, {"dt_max ", "dt_max"},
        {"growth_start ", "growth_start"}, {"horizon ", "T"}, {"beta_j ", "beta"}, {"sigma_j ", "sigma"},
        {"s_j ", "terms"},     {"p_j ", "terms"},   {"Kirchhoff ", "M"},   {"porous_medium_2 ", "s"}};
    for (const auto& [prefix, field] : prefixes)
        if (message.rfind(prefix, 0) == 0) return field;
    return fallback;
}

inline std::optional<OperatorSpec> read_operator(ConfigReader& r, const Grid& grid) {
    const auto name = r.string("operator");
    if (!name) {
        if (!r.has("operator")) r.error("operator", "is required");
        return std::nullopt;
    }
    auto req = [&](const char* key) { return r.required_number(key, "by operator " + *name); };
    auto affine = [&]() -> AffineM {
        const toml::node* n = r.raw("M");
        if (!n) {
            r.error("M", "is required by operator " + *name + " (inline table {a = ..., b = ...})");
            return {};
        }
        const auto* t = n->as_table();
        AffineM M{0.0, 0.0};
        if (!t) {
            r.error("M", "must be an inline table {a = ..., b = ...}");
            return M;
        }
        for (const auto& [k, v] : *t) {
            const std::string key(k.str());
            if ((key != "a" && key != "b") || !v.is_number()) {
                r.error("M." + key, key == "a" || key == "b" ? "must be a number" : "unknown key (M takes a and b)");
                continue;
            }
            (key == "a" ? M.a : M.b) = *v.value<double>();
        }
        return M;
    };
    auto potential = [&]() -> MagneticPotential {
        const int points = grid.kind() == GridKind::interval ? grid.axis(0).points : 0;
        const auto v = r.numbers("A");
        if (!v) {
            if (!r.has("A")) r.error("A", "is required by operator " + *name);
            return {};
        }
        if (grid.kind() != GridKind::interval) {
            r.error("A", "magnetic operators need an interval grid");
            return {};
        }
        if (v->size() == 1) return MagneticPotential::constant(v->front(), points);
        if (static_cast<int>(v->size()) != points) {
            r.error("A", "must be a number or hold one value per interior node (" + std::to_string(points) + ")");
            return {};
        }
        return {*v};
    };

    const std::string& op = *name;
    if (op == "laplacian") return op::Laplacian{};
    if (op == "bilaplacian") return op::BiLaplacian{};
    if (op == "p_laplacian_porous") return op::PLaplacianPorous{req("p"), req("m")};
    if (op == "mean_curvature") return op::MeanCurvature{};
    if (op == "fractional_laplacian") return op::FractionalLaplacian{req("s")};
    if (op == "fractional_p_laplacian") return op::FractionalPLaplacian{req("s"), req("p")};
    if (op == "porous_medium_1") return op::PorousMediumI{req("s"), req("m")};
    if (op == "porous_medium_2") return op::PorousMediumII{req("s")};
    if (op == "fractional_mean_curvature") return op::FractionalMeanCurvature{req("s")};
    if (op == "kirchhoff") return op::Kirchhoff{affine()};
    if (op == "fractional_kirchhoff") {
        const double s = req("s");
        return op::FractionalKirchhoff{s, affine()};
    }
    if (op == "magnetic") return op::Magnetic{potential()};
    if (op == "fractional_magnetic") {
        const double s = req("s");
        return op::FractionalMagnetic{s, potential()};
    }
    if (op == "anisotropic_fractional") {
        op::AnisotropicFractional o;
        if (auto b = r.numbers("beta")) o.beta = *b;
        else if (!r.has("beta")) r.error("beta", "is required by operator " + op);
        if (auto s = r.numbers("sigma")) o.sigma = *s;
        else if (!r.has("sigma")) r.error("sigma", "is required by operator " + op);
        return o;
    }
    if (op == "superposition") {
        op::Superposition o;
        const toml::node* n = r.raw("terms");
        const auto* a = n ? n->as_array() : nullptr;
        if (!a) {
            r.error("terms", "is required by operator superposition (array of {beta, s, p} tables)");
            return o;
        }
        for (std::size_t i = 0; i < a->size(); ++i) {
            const auto* t = (*a)[i].as_table();
            const std::string at = "terms[" + std::to_string(i) + "]";
            if (!t) {
                r.error(at, "must be an inline table {beta, s, p}");
                continue;
            }
            op::SuperpositionTerm term;
            std::set<std::string> seen;
            for (const auto& [k, v] : *t) {
                const std::string key(k.str());
                if ((key != "beta" && key != "s" && key != "p") || !v.is_number()) {
                    r.error(at + "." + key, key == "beta" || key == "s" || key == "p" ? "must be a number" : "unknown key");
                    continue;
                }
                seen.insert(key);
                (key == "beta" ? term.beta : key == "s" ? term.s : term.p) = *v.value<double>();
            }
            for (const char* key : {"beta", "s", "p"})
                if (!seen.count(key)) r.error(at + "." + key, "is required");
            o.terms.push_back(term);
        }
        return o;
    }
    r.error("operator", "unknown operator '" + op + "'");
    return std::nullopt;
}

inline std::optional<Grid> read_grid(ConfigReader& r) {
    const std::string kind = r.string("grid").value_or("interval");
    GridKind gk;
    if (kind == "interval") {
        gk = GridKind::interval;
    } else if (kind == "box") {
        gk = GridKind::box;
    } else {
        r.error("grid", "must be \"interval\" or \"box\"");
        return std::nullopt;
    }
    const std::size_t axes = gk == GridKind::interval ? 1 : 2;

    std::vector<std::pair<double, double>> ends;
    if (const toml::node* n = r.raw("domain")) {
        const auto* a = n->as_array();
        auto pair_of = [&](const toml::node& e) -> std::optional<std::pair<double, double>> {
            const auto* p = e.as_array();
            if (!p || p->size() != 2 || !(*p)[0].is_number() || !(*p)[1].is_number()) return std::nullopt;
            return std::pair{*(*p)[0].value<double>(), *(*p)[1].value<double>()};
        };
        if (a && axes == 1 && a->size() == 2 && (*a)[0].is_number() && (*a)[1].is_number()) {
            ends.push_back({*(*a)[0].value<double>(), *(*a)[1].value<double>()});
        } else if (a && a->size() == axes) {
            for (const auto& e : *a)
                if (auto p = pair_of(e)) ends.push_back(*p);
        }
        if (ends.size() != axes) {
            r.error("domain", axes == 1 ? "must be [a, b]" : "must be [[ax, bx], [ay, by]]");
            return std::nullopt;
        }
    } else {
        ends.assign(axes, {0.0, std::numbers::pi});
    }

    std::vector<int> points;
    if (r.has("N")) {
        const auto v = r.numbers("N");
        if (!v) return std::nullopt;
        for (double x : *v) {
            if (x != std::floor(x)) {
                r.error("N", "must be an integer");
                return std::nullopt;
            }
            points.push_back(static_cast<int>(x));
        }
        if (points.size() == 1 && axes == 2) points.push_back(points.front());
        if (points.size() != axes) {
            r.error("N", "needs one entry per axis");
            return std::nullopt;
        }
    } else {
        points.assign(axes, 63);
    }
    try {
        return make_grid(gk, ends, points);
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        r.error(msg.find("points") != std::string::npos ? "N" : "domain", msg);
        return std::nullopt;
    }
}

inline InitialDatum read_initial(ConfigReader& r, const Grid& grid, std::uint64_t seed) {
    InitialDatum d;
    d.seed = seed;
    const std::string kind = r.string("initial").value_or("sine");
    if (kind == "sine") {
        d.kind = InitialDatum::Kind::sine;
        if (auto k = r.integer("k")) d.k = static_cast<int>(*k);
        if (d.k < 1) r.error("k", "must be >= 1");
    } else if (kind == "bump") {
        d.kind = InitialDatum::Kind::bump;
        for (const auto& ax : grid.axes()) d.center.push_back(0.5 * (ax.a + ax.b));
        if (auto c = r.numbers("center")) {
            if (c->size() != d.center.size()) r.error("center", "needs one coordinate per axis");
            else d.center = *c;
        }
        d.width = r.number("width", 0.25 * (grid.axis(0).b - grid.axis(0).a));
        if (!(d.width > 0.0)) r.error("width", "must be > 0");
    } else if (kind == "random") {
        d.kind = InitialDatum::Kind::random;
        if (auto s = r.integer("datum_seed")) d.seed = static_cast<std::uint64_t>(*s);
        if (auto range = r.numbers("datum_range")) {
            if (range->size() != 2 || !((*range)[0] < (*range)[1])) r.error("datum_range", "must be [lo, hi] with lo < hi");
            else std::tie(d.lo, d.hi) = std::pair{(*range)[0], (*range)[1]};
        }
    } else if (kind == "file") {
        d.kind = InitialDatum::Kind::file;
        if (auto p = r.string("file")) d.path = *p;
        else if (!r.has("file")) r.error("file", "is required when initial = \"file\"");
    } else {
        r.error("initial", "must be one of sine, bump, random, file");
    }
    return d;
}

inline void read_evolution(ConfigReader& r, ExperimentConfig& c) {
    const auto grid = read_grid(r);
    if (!grid) return;
    c.grid = *grid;
    c.spec = read_operator(r, c.grid);
    if (c.spec && r.errors.empty()) {
        try {
            validate(*c.spec);
        } catch (const std::invalid_argument& e) {
            r.error(field_of(e.what(), "operator"), e.what());
        }
        if (needs_box(*c.spec) != (c.grid.kind() == GridKind::box))
            r.error("grid", operator_name(*c.spec) + (needs_box(*c.spec) ? " needs a box grid" : " needs an interval grid"));
    }

    auto& s = c.scheme;
    s.lambda1 = r.number("lambda1", 0.0);
    if (r.has("lambda2")) {
        const double l2 = r.number("lambda2", 1.0);
        if (std::abs(s.lambda1 + l2 - 1.0) > 1e-12) r.error("lambda2", "lambda1 + lambda2 must equal 1");
    }
    if (r.has("alpha")) {
        s.alpha = r.number("alpha", s.alpha);
    } else if (s.lambda1 > 0.0) {
        r.error("alpha", "is required when lambda1 > 0: the Caputo derivative needs its order alpha in (0,1)");
    }
    s.horizon = r.number("T", 10.0);
    s.dt_growth = r.number("dt_growth", 1.0);
    s.growth_start = r.number("growth_start", 1.0);
    s.dt_max = r.number("dt_max", std::numeric_limits<double>::infinity());
    if (const toml::node* n = r.raw("dt")) {
        if (n->is_string() && *n->value<std::string>() == "auto") c.dt_auto = true;
        else if (n->is_number()) s.dt = *n->value<double>();
        else r.error("dt", "must be a number or \"auto\"");
    } else {
        c.dt_auto = true;
    }
    if (c.dt_auto && c.spec && r.errors.empty()) s.dt = std::min(suggest_dt(*c.spec, c.grid, s), s.horizon);
    if (r.errors.empty()) {
        try {
            validate(s);
        } catch (const std::invalid_argument& e) {
            r.error(field_of(e.what(), "scheme"), e.what());
        }
    }

    c.initial = read_initial(r, c.grid, c.seed);
    if (auto e = r.numbers("ell")) {
        c.ells = *e;
        for (double ell : c.ells)
            if (!(std::isfinite(ell) && ell >= 1.0)) r.error("ell", "every exponent must be finite and >= 1");
        if (c.ells.empty()) r.error("ell", "needs at least one exponent");
    }
    c.tol = r.number("tol", c.tol);
    if (!(c.tol > 0.0)) r.error("tol", "must be > 0");
    if (auto w = r.numbers("fit_window")) {
        if (w->size() != 2 || !((*w)[0] > 0.0) || !((*w)[1] > (*w)[0])) r.error("fit_window", "must be [t0, t1] with 0 < t0 < t1");
        else c.fit_window = FitWindow{(*w)[0], (*w)[1]};
    }
    c.dimension = static_cast<int>(r.integer("n").value_or(c.grid.dim()));
    if (c.dimension < 1) r.error("n", "must be >= 1");
    c.dense_until = r.number("dense_until", c.dense_until);
    c.sample_ratio = r.number("sample_ratio", c.sample_ratio);
    if (!(c.sample_ratio > 1.0)) r.error("sample_ratio", "must be > 1");
}

inline void read_recurrence(ConfigReader& r, ExperimentConfig& c) {
    auto& rc = c.recurrence;
    if (auto n = r.integer("n")) rc.n = static_cast<int>(*n);
    else if (!r.has("n")) r.error("n", "is required");
    rc.s = r.required_number("s", "");
    rc.rho = r.required_number("rho", "");
    if (auto K = r.integer("K")) rc.K = static_cast<int>(*K);
    if (auto t = r.integer("trials")) rc.trials = static_cast<long>(*t);
    if (!(rc.n >= 1 && rc.n <= 3)) r.error("n", "dimension n must be 1, 2 or 3");
    if (!(rc.s > 0.0 && rc.s <= 1.0)) r.error("s", "s must lie in (0,1]");
    if (!(rc.rho > 0.0)) r.error("rho", "must be > 0");
    if (rc.K < 10) r.error("K", "must be >= 10");
    if (rc.trials != 0 && rc.trials < 1000) r.error("trials", "must be 0 (no walk) or >= 1000");
    if (rc.trials != 0 && rc.K < 100) r.error("K", "must be >= 100 when trials > 0");
}

}  // namespace detail

/// Builds a validated config from a parsed document; throws ConfigError with
/// every field-level problem found.
inline ExperimentConfig config_from_table(const toml::table& table) {
    detail::ConfigReader r(table);
    ExperimentConfig c;
    c.source = table;
    const std::string kind = r.string("kind").value_or("evolution");
    if (kind == "evolution") c.kind = ExperimentKind::evolution;
    else if (kind == "catalog-check") c.kind = ExperimentKind::catalog_check;
    else if (kind == "recurrence") c.kind = ExperimentKind::recurrence;
    else if (kind == "kernel-validate") c.kind = ExperimentKind::kernel_validate;
    else r.error("kind", "must be one of evolution, catalog-check, recurrence, kernel-validate");

    if (auto s = r.integer("seed")) c.seed = static_cast<std::uint64_t>(*s);
    if (auto o = r.string("out")) c.out = *o;
    if (auto v = r.boolean("svg")) c.svg = *v;
    if (auto b = r.integer("sweep_budget")) c.sweep_budget = static_cast<int>(*b);

    std::string context = "kind " + kind;
    if (c.kind == ExperimentKind::evolution || c.kind == ExperimentKind::catalog_check) {
        detail::read_evolution(r, c);
        if (c.spec) context += ", operator " + operator_name(*c.spec);
    } else if (c.kind == ExperimentKind::recurrence) {
        detail::read_recurrence(r, c);
    }
    r.reject_unused(context);
    if (!r.errors.empty()) throw ConfigError(r.errors);
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    toml::table table;
    try {
        table = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw ConfigError({{"line " + std::to_string(e.source().begin.line), std::string(e.description())}});
    }
    return config_from_table(table);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// u0 on the config's grid.
inline Field make_initial(const ExperimentConfig& c) {
    const auto& d = c.initial;
    const Grid& g = c.grid;
    switch (d.kind) {
        case InitialDatum::Kind::sine: {
            auto mode = [&](const Axis& ax, double x) { return std::sin(d.k * std::numbers::pi * (x - ax.a) / (ax.b - ax.a)); };
            if (g.kind() == GridKind::interval) return Field::sample(g, [&](double x) { return mode(g.axis(0), x); });
            return Field::sample(g, [&](double x, double y) { return mode(g.axis(0), x) * mode(g.axis(1), y); });
        }
        case InitialDatum::Kind::bump: {
            auto bump = [&](double r2) { return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0; };
            if (g.kind() == GridKind::interval)
                return Field::sample(g, [&](double x) { return bump(std::pow((x - d.center[0]) / d.width, 2)); });
            return Field::sample(g, [&](double x, double y) {
                return bump((std::pow(x - d.center[0], 2) + std::pow(y - d.center[1], 2)) / (d.width * d.width));
            });
        }
        case InitialDatum::Kind::random: {
            std::mt19937_64 rng(d.seed);
            std::vector<double> v(static_cast<std::size_t>(g.size()));
            for (auto& x : v) x = d.lo + (d.hi - d.lo) * detail::open_uniform(rng);
            return Field(g, std::move(v));
        }
        case InitialDatum::Kind::file: {
            std::ifstream in(d.path);
            if (!in) throw std::runtime_error("cannot read initial datum file " + d.path);
            std::vector<double> v;
            for (double x; in >> x;) v.push_back(x);
            if (!in.eof()) throw std::runtime_error(d.path + ": not a whitespace-separated list of numbers");
            require(static_cast<int>(v.size()) == g.size(), d.path + " holds " + std::to_string(v.size()) +
                                                                " values, the grid has " + std::to_string(g.size()) +
                                                                " interior nodes");
            return Field(g, std::move(v));
        }
    }
    throw std::logic_error("unhandled initial datum");
}

}  // namespace decaylab
