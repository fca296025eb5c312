#pragma once

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decaylab/domain.hpp"
#include "decaylab/operators.hpp"

namespace decaylab {

/// Time structure of lambda1 d^alpha u + lambda2 u_t + N[u] = 0.
///
/// Steps have size dt until t reaches growth_start; afterwards each step is
/// dt_growth times the previous one (capped at dt_max), so long horizons stay
/// affordable with full Caputo memory.
struct TimeScheme {
    double lambda1 = 0.0;
    double alpha = 0.5;
    double dt = 1e-3;
    double horizon = 1.0;
    double dt_growth = 1.0;
    double growth_start = 1.0;
    double dt_max = std::numeric_limits<double>::infinity();

    double lambda2() const { return 1.0 - lambda1; }
    bool has_memory() const { return lambda1 > 0.0; }
};

inline void validate(const TimeScheme& s) {
    require(std::isfinite(s.lambda1) && s.lambda1 >= 0.0 && s.lambda1 <= 1.0, "lambda1 must lie in [0,1]");
    if (s.has_memory()) require(s.alpha > 0.0 && s.alpha < 1.0, "alpha must lie in (0,1)");
    require(std::isfinite(s.dt) && s.dt > 0.0, "dt must be > 0");
    require(std::isfinite(s.horizon) && s.horizon > 0.0, "horizon T must be > 0");
    require(s.dt <= s.horizon, "dt must not exceed the horizon T");
    require(std::isfinite(s.dt_growth) && s.dt_growth >= 1.0, "dt_growth must be >= 1");
    require(s.growth_start >= 0.0, "growth_start must be >= 0");
    require(s.dt_max >= s.dt, "dt_max must be >= dt");
}

/// Uniform L1 weights b_j = (j+1)^{1-alpha} - j^{1-alpha}, j = 0..k.
inline std::vector<double> caputo_l1_weights(double alpha, int k) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(k >= 0, "k must be >= 0");
    std::vector<double> b(static_cast<std::size_t>(k) + 1);
    const double e = 1.0 - alpha;
    for (int j = 0; j <= k; ++j) {
        // (j+1)^e - j^e = j^e * expm1(e * log1p(1/j)) without cancellation.
        b[j] = j == 0 ? 1.0 : std::pow(j, e) * std::expm1(e * std::log1p(1.0 / j));
    }
    return b;
}

/// Nonuniform L1 coefficients for the step ending at times.back():
/// a_j = [(t_{k+1} - t_j)^{1-alpha} - (t_{k+1} - t_{j+1})^{1-alpha}] / tau_j, j = 0..k.
inline std::vector<double> l1_coefficients(std::span<const double> times, double alpha) {
    require(times.size() >= 2, "l1_coefficients needs at least two time levels");
    const std::size_t k1 = times.size() - 1;
    const double tn = times.back(), e = 1.0 - alpha;
    std::vector<double> a(k1);
    for (std::size_t j = 0; j < k1; ++j) {
        const double tau = times[j + 1] - times[j];
        const double B = tn - times[j + 1];
        a[j] = B <= 0.0 ? std::pow(tau, -alpha) : std::pow(B, e) * std::expm1(e * std::log1p(tau / B)) / tau;
    }
    return a;
}

/// L1 approximation of the Caputo derivative at the last time of a scalar history.
inline double caputo_derivative(std::span<const double> times, std::span<const double> values, double alpha) {
    require(times.size() == values.size(), "caputo_derivative: length mismatch");
    const auto a = l1_coefficients(times, alpha);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * (values[j + 1] - values[j]);
    return acc / std::tgamma(2.0 - alpha);
}

/// Largest step for which lagged fixed-point iteration stays comfortably
/// contractive: (operator order scale) / 4.
inline double suggest_dt(const OperatorSpec& spec, const Grid& grid, const TimeScheme& = {}) {
    double h = grid.axis(0).h;
    for (const auto& ax : grid.axes()) h = std::min(h, ax.h);
    const double order = std::visit(
        overloaded{
            [](const op::BiLaplacian&) { return 4.0; },
            [](const op::FractionalLaplacian& o) { return 2.0 * o.s; },
            [](const op::FractionalPLaplacian& o) { return 2.0 * o.s; },
            [](const op::Superposition& o) {
                double m = 0.0;
                for (const auto& t : o.terms) m = std::max(m, 2.0 * t.s);
                return m;
            },
            [](const op::AnisotropicFractional& o) { return 2.0 * std::max(o.sigma[0], o.sigma[1]); },
            [](const op::PorousMediumI& o) { return 2.0 * o.s; },
            [](const op::PorousMediumII& o) { return 2.0 - 2.0 * o.s; },
            [](const op::FractionalMeanCurvature& o) { return 1.0 + o.s; },
            [](const op::FractionalKirchhoff& o) { return 2.0 * o.s; },
            [](const op::FractionalMagnetic& o) { return 2.0 * o.s; },
            [](const auto&) { return 2.0; },
        },
        spec);
    return std::pow(h, order) / 4.0;
}

template <class T>
struct EvolutionState {
    std::vector<T> current;
    std::vector<T> previous;  // u^{k-1}, empty at k = 0
    double t = 0.0;
    int step = 0;
    double last_dt = 0.0;
    int picard_iterations = 0;
    std::vector<std::vector<T>> history;  // u^0..u^k, kept only with Caputo memory
    std::vector<double> times;            // t_0..t_k, kept only with Caputo memory
};

template <class T>
EvolutionState<T> start_evolution(const BasicField<T>& u0, const TimeScheme& scheme) {
    EvolutionState<T> st;
    st.current = u0.data();
    if (scheme.has_memory()) {
        st.history.push_back(st.current);
        st.times.push_back(0.0);
    }
    return st;
}

namespace detail {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Solves (cI + A)x = b for tridiagonal A without pivoting.
template <class T>
Vec<T> thomas(double c, const Mat<T>& A, const Vec<T>& b) {
    const Eigen::Index n = b.size();
    std::vector<T> cp(static_cast<std::size_t>(n)), dp(static_cast<std::size_t>(n));
    T denom = A(0, 0) + c;
    if (denom == T{}) throw ComputationError("singular tridiagonal system");
    cp[0] = n > 1 ? A(0, 1) / denom : T{};
    dp[0] = b[0] / denom;
    for (Eigen::Index i = 1; i < n; ++i) {
        denom = A(i, i) + c - A(i, i - 1) * cp[i - 1];
        if (denom == T{}) throw ComputationError("singular tridiagonal system");
        cp[i] = i + 1 < n ? A(i, i + 1) / denom : T{};
        dp[i] = (b[i] - A(i, i - 1) * dp[i - 1]) / denom;
    }
    Vec<T> x(n);
    x[n - 1] = dp[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
    return x;
}

template <class T>
double sup_norm(const Vec<T>& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Advances lambda1 d^alpha u + lambda2 u_t + N[u] = 0 by one step.
///
/// The step solves (c I + A(u)) u = rhs with c = lambda1 tau^{-alpha}/Gamma(2-alpha)
/// + lambda2/tau, A the lagged matrix of the operator, and rhs carrying the
/// previous level plus the Caputo memory. Nonlinear operators iterate on the
/// lagged coefficients until the update is below picard_tol relative.
template <class T>
class Stepper {
public:
    static constexpr int max_picard = 50;
    static constexpr double picard_tol = 1e-10;

    Stepper(OperatorSpec spec, const Grid& grid, TimeScheme scheme) : op_(std::move(spec), grid), scheme_(scheme) {
        validate(scheme_);
        require((op_.scalar_kind() == ScalarKind::complex) == is_complex_v<T>,
                operator_name(op_.spec()) + (is_complex_v<T> ? " needs a real field" : " needs a complex field"));
        gamma2_ = scheme_.has_memory() ? std::tgamma(2.0 - scheme_.alpha) : 1.0;
        if (const auto* k = std::get_if<op::Kirchhoff>(&op_.spec())) {
            kirchhoff_.emplace(k->M, 1.0, op::Laplacian{});
        } else if (const auto* k = std::get_if<op::FractionalKirchhoff>(&op_.spec())) {
            kirchhoff_.emplace(k->M, 2.0, op::FractionalLaplacian{k->s});
        }
        if (kirchhoff_) {
            if constexpr (!is_complex_v<T>) {
                const DiscreteOperator base(kirchhoff_->base, grid);
                const std::vector<double> zero(static_cast<std::size_t>(grid.size()), 0.0);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(base.lagged_matrix(std::span<const double>(zero)));
                if (es.info() != Eigen::Success) throw ComputationError("eigen-decomposition failed");
                eigvecs_ = es.eigenvectors();
                eigvals_ = es.eigenvalues();
                kirchhoff_->energy_scale *= grid.axis(0).h;
            }
        } else if (op_.linear()) {
            const std::vector<T> zero(static_cast<std::size_t>(grid.size()), T{});
            constant_ = op_.lagged_matrix(std::span<const T>(zero));
            if (!op_.tridiagonal() && op_.hermitian()) {
                Eigen::SelfAdjointEigenSolver<detail::Mat<T>> es(*constant_);
                if (es.info() != Eigen::Success) throw ComputationError("eigen-decomposition failed");
                eigvecs_ = es.eigenvectors();
                eigvals_ = es.eigenvalues();
            }
        }
    }

    const DiscreteOperator& op() const { return op_; }
    const TimeScheme& scheme() const { return scheme_; }

    /// Step size the schedule prescribes after the given state.
    double next_dt(const EvolutionState<T>& st) const {
        double dt = scheme_.dt;
        if (st.step > 0 && st.t >= scheme_.growth_start) dt = std::min(st.last_dt * scheme_.dt_growth, scheme_.dt_max);
        const double left = scheme_.horizon - st.t;
        // Avoid a sliver step at the end.
        if (dt >= left || left - dt < 1e-9 * dt) dt = left;
        return dt;
    }

    /// One step of size dt; st is left untouched if the step throws.
    void advance(EvolutionState<T>& st, double dt) const {
        require(dt > 0.0 && std::isfinite(dt), "step size must be positive");
        const Eigen::Index n = static_cast<Eigen::Index>(st.current.size());
        const double l1 = scheme_.lambda1, l2 = scheme_.lambda2();
        const double t_new = st.t + dt;
        const Eigen::Map<const detail::Vec<T>> prev(st.current.data(), n);

        double c = l2 / dt;
        detail::Vec<T> rhs = (l2 / dt) * prev;
        if (scheme_.has_memory()) {
            std::vector<double> times = st.times;
            times.push_back(t_new);
            const auto a = l1_coefficients(times, scheme_.alpha);
            const std::size_t k = a.size() - 1;
            const double w = l1 / gamma2_;
            c += w * a[k];
            rhs += w * a[k] * prev;
            detail::Vec<T> memory = detail::Vec<T>::Zero(n);
            for (std::size_t j = 0; j < k; ++j) {
                const Eigen::Map<const detail::Vec<T>> hi(st.history[j + 1].data(), n), lo(st.history[j].data(), n);
                memory += a[j] * (hi - lo);
            }
            rhs -= w * memory;
        }

        detail::Vec<T> u;
        int iterations = 1;
        if (kirchhoff_) {
            u = solve_kirchhoff(c, rhs, iterations);
        } else if (op_.linear()) {
            u = solve_constant(c, rhs);
        } else {
            // Linear extrapolation of the last two levels as the initial guess.
            detail::Vec<T> guess = prev;
            if (!st.previous.empty()) {
                const Eigen::Map<const detail::Vec<T>> older(st.previous.data(), n);
                guess = prev + (dt / st.last_dt) * (prev - older);
            }
            u = guess;
            bool converged = false;
            double change = 0.0;
            for (iterations = 1; iterations <= max_picard; ++iterations) {
                const auto A = op_.lagged_matrix(std::span<const T>(u.data(), static_cast<std::size_t>(n)));
                detail::Vec<T> next = solve(c, A, rhs);
                change = detail::sup_norm<T>(next - u);
                const double scale = detail::sup_norm<T>(next);
                u = std::move(next);
                if (!u.allFinite()) throw ComputationError("fixed-point iterate is not finite");
                if (change <= picard_tol * scale || scale == 0.0) {
                    converged = true;
                    break;
                }
            }
            if (!converged) {
                const auto A = op_.lagged_matrix(std::span<const T>(u.data(), static_cast<std::size_t>(n)));
                const double residual = detail::sup_norm<T>(A * u + c * u - rhs);
                throw ComputationError("fixed-point iteration did not converge in " + std::to_string(max_picard) +
                                       " iterations at t = " + std::to_string(t_new) + " (last update " +
                                       std::to_string(change) + ", residual " + std::to_string(residual) + ")");
            }
        }
        if (!u.allFinite()) throw ComputationError("solution is not finite at t = " + std::to_string(t_new));

        st.previous = st.current;
        st.current.assign(u.data(), u.data() + n);
        st.t = t_new;
        st.last_dt = dt;
        ++st.step;
        st.picard_iterations = iterations;
        if (scheme_.has_memory()) {
            st.history.push_back(st.current);
            st.times.push_back(t_new);
        }
    }

    void advance(EvolutionState<T>& st) const { advance(st, next_dt(st)); }

private:
    // M evaluated at the energy kappa h u^T L u of the base operator L.
    struct KirchhoffData {
        KirchhoffData(AffineM m, double kappa, OperatorSpec b) : M(m), energy_scale(kappa), base(std::move(b)) {}
        AffineM M;
        double energy_scale;
        OperatorSpec base;
    };

    /// Solves (cI + mu L)u = rhs with mu = M(E(u)). In the eigenbasis of L,
    /// E(u(mu)) is decreasing in mu, so mu - M(E(u(mu))) has a unique root
    /// in [a, M(E(u(a)))].
    detail::Vec<T> solve_kirchhoff(double c, const detail::Vec<T>& rhs, int& iterations) const {
        const auto& K = *kirchhoff_;
        const detail::Vec<T> r = eigvecs_->adjoint() * rhs;
        const Eigen::VectorXd& lam = *eigvals_;
        auto energy = [&](double mu) {
            double e = 0.0;
            for (Eigen::Index i = 0; i < r.size(); ++i) {
                const double y = std::abs(r[i]) / (c + mu * lam[i]);
                e += lam[i] * y * y;
            }
            return K.energy_scale * e;
        };
        auto f = [&](double mu) { return mu - K.M(energy(mu)); };
        const double lo = K.M.a, hi = K.M(energy(lo));
        double mu = lo;
        if (hi > lo) {
            std::uintmax_t max_iter = 200;
            const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi),
                                                                  boost::math::tools::eps_tolerance<double>(50), max_iter);
            mu = 0.5 * (a + b);
            iterations = static_cast<int>(max_iter);
        }
        detail::Vec<T> y = r;
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] /= (c + mu * lam[i]);
        return *eigvecs_ * y;
    }

    detail::Vec<T> solve_constant(double c, const detail::Vec<T>& b) const {
        if (op_.tridiagonal()) return detail::thomas<T>(c, *constant_, b);
        if (eigvecs_) {
            detail::Vec<T> y = eigvecs_->adjoint() * b;
            for (Eigen::Index i = 0; i < y.size(); ++i) y[i] /= (c + (*eigvals_)[i]);
            return *eigvecs_ * y;
        }
        if (!lu_ || lu_c_ != c) {
            detail::Mat<T> M = *constant_;
            M.diagonal().array() += c;
            lu_.emplace(M);
            lu_c_ = c;
        }
        return lu_->solve(b);
    }

    detail::Vec<T> solve(double c, const detail::Mat<T>& A, const detail::Vec<T>& b) const {
        if (op_.tridiagonal()) return detail::thomas<T>(c, A, b);
        detail::Mat<T> M = A;
        M.diagonal().array() += c;
        Eigen::PartialPivLU<detail::Mat<T>> lu(M);
        return lu.solve(b);
    }

    DiscreteOperator op_;
    TimeScheme scheme_;
    double gamma2_ = 1.0;
    std::optional<detail::Mat<T>> constant_;
    std::optional<KirchhoffData> kirchhoff_;
    std::optional<detail::Mat<T>> eigvecs_;
    std::optional<Eigen::VectorXd> eigvals_;
    mutable std::optional<Eigen::PartialPivLU<detail::Mat<T>>> lu_;
    mutable double lu_c_ = 0.0;
};

/// One step with a freshly built stepper. Prefer Stepper for whole runs.
template <class T>
EvolutionState<T> advance(EvolutionState<T> st, const OperatorSpec& spec, const Grid& grid, const TimeScheme& scheme) {
    const Stepper<T> stepper(spec, grid, scheme);
    stepper.advance(st);
    return st;
}

/// Norms and dissipation pairings sampled along a trajectory.
struct NormSeries {
    std::vector<double> ells;
    std::vector<double> times;
    std::vector<std::vector<double>> norms;        // [ell][sample]
    std::vector<std::vector<double>> dissipation;  // [ell][sample]
    int steps = 0;
    int step_retries = 0;
    int max_picard_iterations = 0;
    /// Steps (over all ell) where the pairing fell below -1e-10 of its scale.
    int negative_dissipation_steps = 0;
    /// min over steps and ell of D / (h^n sum |u|^{ell-1} |Nu|).
    double min_dissipation_ratio = std::numeric_limits<double>::infinity();
    /// max over steps of (|u^{k+1}|_2 - |u^k|_2) / |u^k|_2.
    double max_l2_increase = -std::numeric_limits<double>::infinity();

    const std::vector<double>& norm(double ell) const { return norms.at(index(ell)); }
    const std::vector<double>& pairing(double ell) const { return dissipation.at(index(ell)); }
    std::size_t index(double ell) const {
        for (std::size_t k = 0; k < ells.size(); ++k)
            if (ells[k] == ell) return k;
        throw std::invalid_argument("exponent " + std::to_string(ell) + " was not sampled");
    }
};

struct EvolutionOptions {
    double dense_until = 1.0;   // sample every step up to this time
    double sample_ratio = 1.05;  // then whenever t grows by this factor
    int max_retries = 8;         // step halvings when the fixed point fails
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

template <class T>
NormSeries run_evolution(const BasicField<T>& u0, const OperatorSpec& spec, const TimeScheme& scheme,
                         std::vector<double> ells, const EvolutionOptions& opts = {}) {
    require(!ells.empty(), "at least one norm exponent is required");
    for (double ell : ells) require(std::isfinite(ell) && ell >= 1.0, "norm exponents must be finite and >= 1");
    for (const auto& x : u0.values()) require(std::isfinite(std::abs(x)), "initial datum contains NaN or Inf");
    const Stepper<T> stepper(spec, u0.grid(), scheme);
    const double vol = u0.grid().cell_volume();

    NormSeries out;
    out.ells = ells;
    out.norms.resize(ells.size());
    out.dissipation.resize(ells.size());

    EvolutionState<T> st = start_evolution(u0, scheme);
    auto field = [&] { return BasicField<T>(u0.grid(), st.current); };

    std::vector<T> Nu;
    auto measure = [&](bool record) {
        const auto u = field();
        Nu = stepper.op().apply(std::span<const T>(st.current));
        for (std::size_t k = 0; k < ells.size(); ++k) {
            const double nrm = lp_norm(u, ells[k]);
            if (!std::isfinite(nrm)) throw ComputationError("norm overflow at t = " + std::to_string(st.t));
            const double D = decaylab::pairing<T>(st.current, Nu, ells[k], vol);
            if (!std::isfinite(D)) throw ComputationError("dissipation pairing is not finite at t = " + std::to_string(st.t));
            double scale = 0.0;
            for (std::size_t i = 0; i < Nu.size(); ++i)
                scale += std::pow(std::abs(st.current[i]), ells[k] - 1.0) * std::abs(Nu[i]);
            scale *= vol;
            if (scale > 0.0) {
                out.min_dissipation_ratio = std::min(out.min_dissipation_ratio, D / scale);
                if (D < -1e-10 * scale) ++out.negative_dissipation_steps;
            }
            if (record) {
                out.norms[k].push_back(nrm);
                out.dissipation[k].push_back(D);
            }
        }
        if (record) out.times.push_back(st.t);
    };

    measure(true);
    double last_sample = 0.0;
    double l2_prev = lp_norm(field(), 2.0);
    while (st.t < scheme.horizon) {
        if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline)
            throw ComputationError("time budget exhausted at t = " + std::to_string(st.t));
        double dt = stepper.next_dt(st);
        for (int attempt = 0;; ++attempt) {
            try {
                stepper.advance(st, dt);
                break;
            } catch (const ComputationError&) {
                if (attempt >= opts.max_retries) throw;
                dt *= 0.5;
                ++out.step_retries;
            }
        }
        out.max_picard_iterations = std::max(out.max_picard_iterations, st.picard_iterations);
        const double l2 = lp_norm(field(), 2.0);
        if (l2_prev > 0.0) out.max_l2_increase = std::max(out.max_l2_increase, (l2 - l2_prev) / l2_prev);
        l2_prev = l2;
        const bool final_step = st.t >= scheme.horizon;
        const bool record = st.t <= opts.dense_until || st.t >= last_sample * opts.sample_ratio || final_step;
        measure(record);
        if (record) last_sample = st.t;
    }
    out.steps = st.step;
    return out;
}

}  // namespace decaylab
