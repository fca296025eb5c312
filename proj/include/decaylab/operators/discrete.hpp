#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decaylab/detail/cell_quadrature.hpp"
#include "decaylab/domain/field.hpp"
#include "decaylab/operators/curvature_profile.hpp"
#include "decaylab/operators/spec.hpp"

namespace decaylab {

namespace detail {

inline constexpr double gradient_eps = 1e-10;

/// |u|^{m-1} u.
inline double signed_pow(double u, double m) {
    if (m == 1.0 || u == 0.0) return u;
    return std::copysign(std::pow(std::abs(u), m), u);
}

/// Lagged coefficient |z|^{p-2}, regularized as (z^2 + eps^2)^{(p-2)/2} for p < 2.
inline double p_coefficient(double z, double p) {
    if (p == 2.0) return 1.0;
    if (p < 2.0) return std::pow(z * z + gradient_eps * gradient_eps, (p - 2.0) / 2.0);
    return std::pow(std::abs(z), p - 2.0);
}

/// |u|^{m-1}, the lagged mobility of the signed power (regularized for m < 1).
inline double m_coefficient(double u, double m) {
    if (m == 1.0) return 1.0;
    if (m < 1.0) return std::pow(u * u + gradient_eps * gradient_eps, (m - 1.0) / 2.0);
    return std::pow(std::abs(u), m - 1.0);
}

/// Forward difference quotients over the N+1 faces of an interval, ghosts zero.
inline std::vector<double> face_differences(std::span<const double> w, double h) {
    const int n = static_cast<int>(w.size());
    std::vector<double> d(static_cast<std::size_t>(n + 1));
    for (int f = 0; f <= n; ++f) {
        const double right = f < n ? w[f] : 0.0;
        const double left = f > 0 ? w[f - 1] : 0.0;
        d[f] = (right - left) / h;
    }
    return d;
}

/// Minus the discrete divergence of face fluxes.
inline std::vector<double> neg_divergence(const std::vector<double>& flux, double h) {
    const int n = static_cast<int>(flux.size()) - 1;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[i] = -(flux[i + 1] - flux[i]) / h;
    return out;
}

inline std::vector<double> laplacian_1d(std::span<const double> u, double h) {
    return neg_divergence(face_differences(u, h), h);
}

inline double h1_energy(std::span<const double> u, double h) {
    double sum = 0.0;
    for (double d : face_differences(u, h)) sum += d * d;
    return sum * h;
}

inline double gagliardo_energy(std::span<const double> u, const KernelWeights& w) {
    const int n = static_cast<int>(u.size());
    double pairs = 0.0, tails = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = u[i] - u[j];
            pairs += d * d * w.pair(i, j);
        }
        tails += u[i] * u[i] * w.boundary(i);
    }
    return w.h * (2.0 * pairs + 2.0 * tails);
}

/// sum_{j != i} phi(u_i - u_j) w_ij + phi(u_i) B_i with phi(z) = coeff(z) z.
inline std::vector<double> fractional_1d(std::span<const double> u, const KernelWeights& w, double p) {
    const int n = static_cast<int>(u.size());
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double z = u[i] - u[j];
            acc += p_coefficient(z, p) * z * w.pair(i, j);
        }
        acc += p_coefficient(u[i], p) * u[i] * w.boundary(i);
        out[i] = acc;
    }
    return out;
}

inline Eigen::MatrixXd fractional_1d_matrix(std::span<const double> u_star, const KernelWeights& w, double p) {
    const int n = static_cast<int>(u_star.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double c = p_coefficient(u_star[i] - u_star[j], p) * w.pair(i, j);
            A(i, j) = -c;
            diag += c;
        }
        A(i, i) = diag + p_coefficient(u_star[i], p) * w.boundary(i);
    }
    return A;
}

/// Tridiagonal matrix of -div(K_f * grad(g u)) with face coefficients K and node mobilities g.
inline Eigen::MatrixXd flux_matrix(const std::vector<double>& K, const std::vector<double>& g, double h) {
    const int n = static_cast<int>(g.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    const double inv = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        A(i, i) = (K[i] + K[i + 1]) * g[i] * inv;
        if (i + 1 < n) A(i, i + 1) = -K[i + 1] * g[i + 1] * inv;
        if (i > 0) A(i, i - 1) = -K[i] * g[i - 1] * inv;
    }
    return A;
}

}  // namespace detail

/// An OperatorSpec bound to a grid, with every kernel weight precomputed.
///
/// apply(u) evaluates N[u]. lagged_matrix(u*) returns A(u*) with A(u)u = N[u],
/// the Picard linearization used by the time stepper.
class DiscreteOperator {
public:
    DiscreteOperator(OperatorSpec spec, Grid grid) : spec_(std::move(spec)), grid_(std::move(grid)) {
        validate(spec_);
        if (needs_box(spec_))
            require(grid_.kind() == GridKind::box, operator_name(spec_) + " needs a box grid");
        else
            require(grid_.kind() == GridKind::interval, operator_name(spec_) + " needs an interval grid");
        build();
    }

    const OperatorSpec& spec() const { return spec_; }
    const Grid& grid() const { return grid_; }
    ScalarKind scalar_kind() const { return decaylab::scalar_kind(spec_); }
    bool linear() const { return is_linear(spec_); }

    /// A(u*) is tridiagonal for every u*.
    bool tridiagonal() const {
        return std::holds_alternative<op::Laplacian>(spec_) || std::holds_alternative<op::PLaplacianPorous>(spec_) ||
               std::holds_alternative<op::MeanCurvature>(spec_) || std::holds_alternative<op::Kirchhoff>(spec_) ||
               std::holds_alternative<op::Magnetic>(spec_);
    }

    /// A is constant and Hermitian (symmetric in the real case).
    bool hermitian() const {
        if (!linear()) return false;
        if (const auto* m = std::get_if<op::Magnetic>(&spec_)) {
            for (double a : m->A.values)
                if (a != m->A.values.front()) return false;
        }
        return true;
    }

    std::vector<double> apply(std::span<const double> u) const;
    std::vector<Complex> apply(std::span<const Complex> u) const;
    Eigen::MatrixXd lagged_matrix(std::span<const double> u_star) const;
    Eigen::MatrixXcd lagged_matrix(std::span<const Complex> u_star) const;

    template <class T>
    BasicField<T> apply(const BasicField<T>& u) const {
        require(u.grid() == grid_, "field grid does not match the operator grid");
        return BasicField<T>(grid_, apply(u.values()));
    }

private:
    void build();
    const Axis& axis() const { return grid_.axis(0); }
    int n() const { return grid_.size(); }

    void expect(ScalarKind k) const {
        if (k != scalar_kind())
            throw std::invalid_argument(operator_name(spec_) + (k == ScalarKind::complex
                                                                    ? " acts on real fields, got a complex field"
                                                                    : " acts on complex fields, got a real field"));
    }

    std::vector<double> anisotropic(std::span<const double> u) const;
    Eigen::MatrixXd anisotropic_matrix() const;
    std::vector<double> riesz(std::span<const double> u) const;  // length N+2, boundary points included
    double curvature_pairs(std::span<const double> u, int i) const;

    OperatorSpec spec_;
    Grid grid_;
    std::vector<detail::KernelWeights> kw_;  // one per term / axis
    std::vector<std::vector<double>> riesz_;
    std::optional<detail::CurvatureProfile> profile_;
    Eigen::MatrixXcd phase_;    // fractional magnetic: e^{i theta_ij}
    std::vector<double> A_;     // classical magnetic: A at nodes
    std::vector<double> dA_;    // classical magnetic: A' at nodes
};

inline void DiscreteOperator::build() {
    std::visit(overloaded{
                   [&](const op::FractionalLaplacian& o) {
                       kw_.push_back(detail::make_kernel_weights(axis(), 2.0 * o.s, 2.0));
                   },
                   [&](const op::FractionalPLaplacian& o) {
                       kw_.push_back(detail::make_kernel_weights(axis(), o.s * o.p, o.p));
                   },
                   [&](const op::Superposition& o) {
                       for (const auto& t : o.terms) kw_.push_back(detail::make_kernel_weights(axis(), t.s * t.p, t.p));
                   },
                   [&](const op::AnisotropicFractional& o) {
                       for (int k = 0; k < 2; ++k)
                           kw_.push_back(detail::make_kernel_weights(grid_.axis(k), 2.0 * o.sigma[k], 2.0));
                   },
                   [&](const op::PorousMediumI& o) {
                       kw_.push_back(detail::make_kernel_weights(axis(), 2.0 * o.s, 2.0));
                   },
                   [&](const op::PorousMediumII& o) { riesz_ = detail::riesz_hat_weights(axis(), o.s); },
                   [&](const op::FractionalMeanCurvature& o) {
                       kw_.push_back(detail::make_kernel_weights(axis(), o.s, 1.0));
                       profile_.emplace(o.s);
                   },
                   [&](const op::FractionalKirchhoff& o) {
                       kw_.push_back(detail::make_kernel_weights(axis(), 2.0 * o.s, 2.0));
                   },
                   [&](const op::Magnetic& o) {
                       require(static_cast<int>(o.A.values.size()) == n(),
                               "magnetic potential has " + std::to_string(o.A.values.size()) + " values, grid has " +
                                   std::to_string(n()));
                       const double h = axis().h;
                       A_ = o.A.values;
                       dA_.resize(A_.size());
                       const int N = n();
                       for (int i = 1; i + 1 < N; ++i) dA_[i] = (A_[i + 1] - A_[i - 1]) / (2 * h);
                       dA_[0] = (-3 * A_[0] + 4 * A_[1] - A_[2]) / (2 * h);
                       dA_[N - 1] = (3 * A_[N - 1] - 4 * A_[N - 2] + A_[N - 3]) / (2 * h);
                   },
                   [&](const op::FractionalMagnetic& o) {
                       require(static_cast<int>(o.A.values.size()) == n(),
                               "magnetic potential has " + std::to_string(o.A.values.size()) + " values, grid has " +
                                   std::to_string(n()));
                       kw_.push_back(detail::make_kernel_weights(axis(), 2.0 * o.s, 2.0));
                       const int N = n();
                       phase_ = Eigen::MatrixXcd::Zero(N, N);
                       for (int i = 0; i < N; ++i)
                           for (int j = 0; j < N; ++j) {
                               const double xi = axis().node(i), xj = axis().node(j);
                               const double theta = (xi - xj) * o.A.at(axis(), 0.5 * (xi + xj));
                               phase_(i, j) = std::polar(1.0, theta);
                           }
                   },
                   [](const auto&) {},
               },
               spec_);
}

inline std::vector<double> DiscreteOperator::anisotropic(std::span<const double> u) const {
    const auto& o = std::get<op::AnisotropicFractional>(spec_);
    const int nx = grid_.axis(0).points, ny = grid_.axis(1).points;
    std::vector<double> out(u.size(), 0.0);
    std::vector<double> line;
    for (int j = 0; j < ny; ++j) {
        line.assign(u.begin() + nx * j, u.begin() + nx * (j + 1));
        const auto r = detail::fractional_1d(line, kw_[0], 2.0);
        for (int i = 0; i < nx; ++i) out[i + nx * j] += o.beta[0] * r[i];
    }
    for (int i = 0; i < nx; ++i) {
        line.resize(ny);
        for (int j = 0; j < ny; ++j) line[j] = u[i + nx * j];
        const auto r = detail::fractional_1d(line, kw_[1], 2.0);
        for (int j = 0; j < ny; ++j) out[i + nx * j] += o.beta[1] * r[j];
    }
    return out;
}

inline Eigen::MatrixXd DiscreteOperator::anisotropic_matrix() const {
    const auto& o = std::get<op::AnisotropicFractional>(spec_);
    const int nx = grid_.axis(0).points, ny = grid_.axis(1).points;
    const std::vector<double> zx(nx, 0.0), zy(ny, 0.0);
    const Eigen::MatrixXd Ax = detail::fractional_1d_matrix(zx, kw_[0], 2.0);
    const Eigen::MatrixXd Ay = detail::fractional_1d_matrix(zy, kw_[1], 2.0);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nx * ny, nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            for (int k = 0; k < nx; ++k) A(i + nx * j, k + nx * j) += o.beta[0] * Ax(i, k);
            for (int k = 0; k < ny; ++k) A(i + nx * j, i + nx * k) += o.beta[1] * Ay(j, k);
        }
    return A;
}

inline std::vector<double> DiscreteOperator::riesz(std::span<const double> u) const {
    std::vector<double> R(riesz_.size(), 0.0);
    for (std::size_t k = 0; k < riesz_.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) acc += riesz_[k][j] * u[j];
        R[k] = acc;
    }
    return R;
}

inline double DiscreteOperator::curvature_pairs(std::span<const double> u, int i) const {
    const auto& w = kw_[0];
    const auto& F = *profile_;
    const int N = n();
    const double h = w.h;
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const double dist = std::abs(i - j) * h;
        acc += F((u[i] - u[j]) / dist) * w.pair(i, j);
    }
    const double DL = (i + 1) * h, DR = (N - i) * h;
    acc += F(u[i] / DL) * w.ghost_left[i] + F(u[i] / DR) * w.ghost_right[i];
    acc += F.tail(u[i], DL) + F.tail(u[i], DR);
    return acc;
}

inline std::vector<double> DiscreteOperator::apply(std::span<const double> u) const {
    expect(ScalarKind::real);
    require(static_cast<int>(u.size()) == n(), "field length does not match the grid");
    const double h = grid_.axis(0).h;
    return std::visit(
        overloaded{
            [&](const op::Laplacian&) { return detail::laplacian_1d(u, h); },
            [&](const op::BiLaplacian&) {
                const auto Lu = detail::laplacian_1d(u, h);
                return detail::laplacian_1d(Lu, h);
            },
            [&](const op::PLaplacianPorous& o) {
                std::vector<double> w(u.begin(), u.end());
                for (auto& x : w) x = detail::signed_pow(x, o.m);
                auto flux = detail::face_differences(w, h);
                for (auto& d : flux) d *= detail::p_coefficient(d, o.p);
                return detail::neg_divergence(flux, h);
            },
            [&](const op::MeanCurvature&) {
                auto flux = detail::face_differences(u, h);
                for (auto& d : flux) d /= std::sqrt(1.0 + d * d);
                return detail::neg_divergence(flux, h);
            },
            [&](const op::FractionalLaplacian&) { return detail::fractional_1d(u, kw_[0], 2.0); },
            [&](const op::FractionalPLaplacian& o) { return detail::fractional_1d(u, kw_[0], o.p); },
            [&](const op::Superposition& o) {
                std::vector<double> out(u.size(), 0.0);
                for (std::size_t t = 0; t < o.terms.size(); ++t) {
                    const auto r = detail::fractional_1d(u, kw_[t], o.terms[t].p);
                    for (std::size_t i = 0; i < out.size(); ++i) out[i] += o.terms[t].beta * r[i];
                }
                return out;
            },
            [&](const op::AnisotropicFractional&) { return anisotropic(u); },
            [&](const op::PorousMediumI& o) {
                std::vector<double> w(u.begin(), u.end());
                for (auto& x : w) x = detail::signed_pow(x, o.m);
                return detail::fractional_1d(w, kw_[0], 2.0);
            },
            [&](const op::PorousMediumII&) {
                const auto R = riesz(u);
                const int N = n();
                std::vector<double> flux(static_cast<std::size_t>(N + 1));
                for (int f = 0; f <= N; ++f) {
                    const double ul = f > 0 ? u[f - 1] : 0.0, ur = f < N ? u[f] : 0.0;
                    flux[f] = 0.5 * (ul + ur) * (R[f + 1] - R[f]) / h;
                }
                return detail::neg_divergence(flux, h);
            },
            [&](const op::FractionalMeanCurvature&) {
                std::vector<double> out(u.size());
                for (int i = 0; i < n(); ++i) out[i] = curvature_pairs(u, i);
                return out;
            },
            [&](const op::Kirchhoff& o) {
                auto out = detail::laplacian_1d(u, h);
                const double M = o.M(detail::h1_energy(u, h));
                for (auto& x : out) x *= M;
                return out;
            },
            [&](const op::FractionalKirchhoff& o) {
                auto out = detail::fractional_1d(u, kw_[0], 2.0);
                const double M = o.M(detail::gagliardo_energy(u, kw_[0]));
                for (auto& x : out) x *= M;
                return out;
            },
            [&](const auto&) -> std::vector<double> { throw std::logic_error("unreachable"); },
        },
        spec_);
}

inline std::vector<Complex> DiscreteOperator::apply(std::span<const Complex> u) const {
    expect(ScalarKind::complex);
    require(static_cast<int>(u.size()) == n(), "field length does not match the grid");
    const int N = n();
    const double h = axis().h;
    std::vector<Complex> out(static_cast<std::size_t>(N));
    const Complex I(0.0, 1.0);
    if (std::holds_alternative<op::Magnetic>(spec_)) {
        auto at = [&](int i) { return (i < 0 || i >= N) ? Complex{} : u[i]; };
        for (int i = 0; i < N; ++i) {
            const Complex right = (at(i + 1) - at(i)) / h, left = (at(i) - at(i - 1)) / h;
            const Complex lap = -(right - left) / h;
            const Complex du = (at(i + 1) - at(i - 1)) / (2 * h);
            out[i] = lap + 2.0 * I * A_[i] * du + (I * dA_[i] + A_[i] * A_[i]) * at(i);
        }
        return out;
    }
    const auto& w = kw_[0];
    for (int i = 0; i < N; ++i) {
        Complex acc{};
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            acc += (u[i] - phase_(i, j) * u[j]) * w.pair(i, j);
        }
        acc += u[i] * w.boundary(i);
        out[i] = acc;
    }
    return out;
}

inline Eigen::MatrixXd DiscreteOperator::lagged_matrix(std::span<const double> us) const {
    expect(ScalarKind::real);
    require(static_cast<int>(us.size()) == n(), "field length does not match the grid");
    const int N = n();
    const double h = grid_.axis(0).h;
    auto laplacian = [&] {
        return detail::flux_matrix(std::vector<double>(N + 1, 1.0), std::vector<double>(N, 1.0), h);
    };
    return std::visit(
        overloaded{
            [&](const op::Laplacian&) { return laplacian(); },
            [&](const op::BiLaplacian&) -> Eigen::MatrixXd {
                const Eigen::MatrixXd L = laplacian();
                return L * L;
            },
            [&](const op::PLaplacianPorous& o) {
                std::vector<double> w(us.begin(), us.end()), g(us.size());
                for (int i = 0; i < N; ++i) {
                    w[i] = detail::signed_pow(us[i], o.m);
                    g[i] = detail::m_coefficient(us[i], o.m);
                }
                auto K = detail::face_differences(w, h);
                for (auto& d : K) d = detail::p_coefficient(d, o.p);
                return detail::flux_matrix(K, g, h);
            },
            [&](const op::MeanCurvature&) {
                auto K = detail::face_differences(us, h);
                for (auto& d : K) d = 1.0 / std::sqrt(1.0 + d * d);
                return detail::flux_matrix(K, std::vector<double>(N, 1.0), h);
            },
            [&](const op::FractionalLaplacian&) { return detail::fractional_1d_matrix(us, kw_[0], 2.0); },
            [&](const op::FractionalPLaplacian& o) { return detail::fractional_1d_matrix(us, kw_[0], o.p); },
            [&](const op::Superposition& o) {
                Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
                for (std::size_t t = 0; t < o.terms.size(); ++t)
                    A += o.terms[t].beta * detail::fractional_1d_matrix(us, kw_[t], o.terms[t].p);
                return A;
            },
            [&](const op::AnisotropicFractional&) { return anisotropic_matrix(); },
            [&](const op::PorousMediumI& o) -> Eigen::MatrixXd {
                Eigen::MatrixXd A = detail::fractional_1d_matrix(us, kw_[0], 2.0);
                for (int j = 0; j < N; ++j) A.col(j) *= detail::m_coefficient(us[j], o.m);
                return A;
            },
            [&](const op::PorousMediumII&) {
                Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
                std::vector<double> mob(static_cast<std::size_t>(N + 1));
                for (int f = 0; f <= N; ++f)
                    mob[f] = 0.5 * ((f > 0 ? us[f - 1] : 0.0) + (f < N ? us[f] : 0.0));
                const double inv = 1.0 / (h * h);
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) {
                        // Rows of V are shifted by one: V[k+1] is the boundary-inclusive node k.
                        const double right = mob[i + 1] * (riesz_[i + 2][j] - riesz_[i + 1][j]);
                        const double left = mob[i] * (riesz_[i + 1][j] - riesz_[i][j]);
                        A(i, j) = -(right - left) * inv;
                    }
                return A;
            },
            [&](const op::FractionalMeanCurvature&) {
                const auto& w = kw_[0];
                const auto& F = *profile_;
                Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
                for (int i = 0; i < N; ++i) {
                    double diag = 0.0;
                    for (int j = 0; j < N; ++j) {
                        if (j == i) continue;
                        const double dist = std::abs(i - j) * h;
                        const double c = F.secant((us[i] - us[j]) / dist) / dist * w.pair(i, j);
                        A(i, j) = -c;
                        diag += c;
                    }
                    const double DL = (i + 1) * h, DR = (N - i) * h;
                    diag += F.secant(us[i] / DL) / DL * w.ghost_left[i] + F.secant(us[i] / DR) / DR * w.ghost_right[i];
                    diag += F.tail_secant(us[i], DL) + F.tail_secant(us[i], DR);
                    A(i, i) = diag;
                }
                return A;
            },
            [&](const op::Kirchhoff& o) -> Eigen::MatrixXd { return o.M(detail::h1_energy(us, h)) * laplacian(); },
            [&](const op::FractionalKirchhoff& o) -> Eigen::MatrixXd {
                return o.M(detail::gagliardo_energy(us, kw_[0])) * detail::fractional_1d_matrix(us, kw_[0], 2.0);
            },
            [&](const auto&) -> Eigen::MatrixXd { throw std::logic_error("unreachable"); },
        },
        spec_);
}

inline Eigen::MatrixXcd DiscreteOperator::lagged_matrix(std::span<const Complex> us) const {
    expect(ScalarKind::complex);
    require(static_cast<int>(us.size()) == n(), "field length does not match the grid");
    const int N = n();
    const double h = axis().h;
    const Complex I(0.0, 1.0);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
    if (std::holds_alternative<op::Magnetic>(spec_)) {
        for (int i = 0; i < N; ++i) {
            A(i, i) = 2.0 / (h * h) + I * dA_[i] + A_[i] * A_[i];
            if (i + 1 < N) A(i, i + 1) = -1.0 / (h * h) + I * A_[i] / h;
            if (i > 0) A(i, i - 1) = -1.0 / (h * h) - I * A_[i] / h;
        }
        return A;
    }
    const auto& w = kw_[0];
    for (int i = 0; i < N; ++i) {
        double diag = 0.0;
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            A(i, j) = -phase_(i, j) * w.pair(i, j);
            diag += w.pair(i, j);
        }
        A(i, i) = diag + w.boundary(i);
    }
    return A;
}

}  // namespace decaylab
