#include <catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "decaylab/operators.hpp"
#include "oracles.hpp"

using namespace decaylab;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> vec(const Field& f) { return f.data(); }

Field bump(const Grid& g, double c = 0.45, double width = 0.2) {
    return Field::sample(g, [&](double x) { return std::exp(-std::pow((x - c) / width, 2)); });
}

// Every real interval variant with representative parameters.
std::vector<OperatorSpec> real_interval_specs() {
    return {
        op::Laplacian{},
        op::BiLaplacian{},
        op::PLaplacianPorous{3.0, 2.0},
        op::PLaplacianPorous{1.5, 1.0},
        op::MeanCurvature{},
        op::FractionalLaplacian{0.3},
        op::FractionalLaplacian{0.8},
        op::FractionalPLaplacian{0.4, 3.0},
        op::FractionalPLaplacian{0.6, 1.5},
        op::Superposition{{{1.0, 0.3, 2.0}, {0.5, 0.7, 3.0}}},
        op::PorousMediumI{0.5, 2.0},
        op::PorousMediumII{0.25},
        op::FractionalMeanCurvature{0.5},
        op::Kirchhoff{{1.0, 2.0}},
        op::Kirchhoff{{0.0, 1.0}},
        op::FractionalKirchhoff{0.5, {0.0, 1.0}},
    };
}

}  // namespace

TEST_CASE("zero maps to zero for every operator", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 17);
    for (const auto& spec : real_interval_specs()) {
        INFO(operator_name(spec));
        const Field out = apply_operator(spec, Field(g));
        CHECK(oracle::max_abs(out.data()) == 0.0);
    }
    const ComplexField z(g);
    CHECK(max_abs(apply_operator(op::Magnetic{MagneticPotential::constant(1.0, 17)}, z)) == 0.0);
    CHECK(max_abs(apply_operator(op::FractionalMagnetic{0.5, MagneticPotential::constant(1.0, 17)}, z)) == 0.0);
    const Grid b = make_box({0, 1}, {0, 1}, 9, 9);
    CHECK(max_abs(apply_operator(op::AnisotropicFractional{{1, 1}, {0.5, 0.5}}, Field(b))) == 0.0);
}

TEST_CASE("kind and dimension mismatches are rejected", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 9);
    const Grid b = make_box({0, 1}, {0, 1}, 9, 9);
    CHECK_THROWS_AS(apply_operator(op::Laplacian{}, ComplexField(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::Magnetic{MagneticPotential::constant(0.0, 9)}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::Magnetic{MagneticPotential::constant(0.0, 8)}, ComplexField(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::FractionalLaplacian{0.5}, Field(b)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::AnisotropicFractional{{1, 1}, {0.5, 0.5}}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::AnisotropicFractional{{1}, {0.5}}, Field(b)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::FractionalLaplacian{1.0}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::PLaplacianPorous{1.0, 1.0}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::PLaplacianPorous{2.0, 0.0}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::PorousMediumII{0.5}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::Kirchhoff{{0.0, 0.0}}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::Kirchhoff{{1.0, -1.0}}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::Superposition{}, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(apply_operator(op::Superposition{{{0.0, 0.5, 2.0}}}, Field(g)), std::invalid_argument);
}

TEST_CASE("p-Laplacian of the porous power", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 9);
    const Field u = bump(g);
    CHECK(vec(apply_p_laplacian_porous(u, 2.0, 1.0)) == vec(apply_laplacian(u)));

    const double h = g.axis().h;
    const Field hat = Field::sample(g, [](double x) { return std::max(0.0, 0.3 - std::abs(x - 0.5)); });
    std::vector<double> w(11, 0.0), ref(9);
    for (int i = 0; i < 9; ++i) w[i + 1] = hat[i] * hat[i];
    for (int i = 0; i < 9; ++i) {
        const double dr = (w[i + 2] - w[i + 1]) / h, dl = (w[i + 1] - w[i]) / h;
        ref[i] = -(std::abs(dr) * dr - std::abs(dl) * dl) / h;
    }
    const auto out = vec(apply_p_laplacian_porous(hat, 3.0, 2.0));
    CHECK(oracle::max_abs_diff(out, ref) <= 1e-12 * oracle::max_abs(ref));

    const Grid sym = make_interval(-1.0, 1.0, 21);
    const Field odd = Field::sample(sym, [](double x) { return x * std::exp(-3 * x * x); });
    const auto o = vec(apply_p_laplacian_porous(odd, 1.5, 2.5));
    for (int i = 0; i < 21; ++i) CHECK(o[i] == Approx(-o[20 - i]).margin(1e-12));
}

TEST_CASE("mean curvature linearizes to the Laplacian", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 33);
    const Field u = Field::sample(g, [](double x) { return std::sin(pi * x) + 0.3 * std::sin(3 * pi * x); });
    const double eps = 1e-6;
    const auto lin = vec(apply_mean_curvature(scaled(u, eps)));
    const auto lap = vec(apply_laplacian(u));
    for (int i = 0; i < 33; ++i) CHECK(lin[i] / eps == Approx(lap[i]).epsilon(1e-6).margin(1e-9));
    const Field big = scaled(u, 50.0);
    const auto flux = detail::face_differences(big.values(), g.axis().h);
    for (double d : flux) CHECK(std::abs(d / std::sqrt(1 + d * d)) < 1.0);
}

TEST_CASE("fractional Laplacian against a direct-sum oracle", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 17);
    const Field u = bump(g);
    const auto out = vec(apply_fractional_laplacian(u, 0.5));
    const auto ref = oracle::fractional_p(u.data(), g.axis().h, 0.5, 2.0);
    for (int i = 0; i < 17; ++i) CHECK(out[i] == Approx(ref[i]).epsilon(1e-10));
}

TEST_CASE("fractional Laplacian of a hat matches the defining integral", "[operators]") {
    // Kinks at nodes 8, 16, 24; elsewhere u is linear across the singular cell
    // and the scheme is exact up to rounding.
    const Grid g = make_interval(0.0, 1.0, 33);
    const double h = g.axis().h, c = g.axis().node(16), width = 8 * h;
    auto hat_fn = [&](double y) { return std::max(0.0, 1.0 - std::abs(y - c) / width); };
    const Field hat = Field::sample(g, hat_fn);
    const double s = 0.5;
    const auto out = vec(apply_fractional_laplacian(hat, s));
    for (int i = 0; i < 33; ++i) {
        if (i == 8 || i == 16 || i == 24) continue;
        const double x = g.axis().node(i);
        auto integrand = [&](double y) { return (hat_fn(x) - hat_fn(y)) * std::pow(std::abs(x - y), -1 - 2 * s); };
        // Breakpoints: kinks of the hat, the domain ends, and the excluded
        // symmetric window around x where the linear part cancels.
        std::vector<double> cuts = {0.0, 1.0, c - width, c, c + width, x - h, x + h};
        std::sort(cuts.begin(), cuts.end());
        double ref = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double lo = cuts[k], hi = cuts[k + 1];
            if (hi <= lo || (lo >= x - h && hi <= x + h)) continue;
            ref += oracle::ts(integrand, lo, hi);
        }
        const double ux = hat_fn(x);
        ref += ux * (std::pow(x, -2 * s) + std::pow(1 - x, -2 * s)) / (2 * s);
        CHECK(out[i] == Approx(ref).epsilon(1e-6).margin(1e-9));
    }
}

TEST_CASE("fractional Laplacian is positive at a strict maximum", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 41);
    for (double s : {0.1, 0.5, 0.9}) {
        const Field u = bump(g, 0.5, 0.1);
        const auto out = vec(apply_fractional_laplacian(u, s));
        CHECK(out[20] > 0.0);
        CHECK(vec(apply_fractional_mean_curvature(u, s))[20] > 0.0);
    }
}

TEST_CASE("fractional p-Laplacian", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 17);
    const Field u = bump(g);
    const auto fl = vec(apply_fractional_laplacian(u, 0.35));
    const auto fp = vec(apply_fractional_p_laplacian(u, 0.35, 2.0));
    CHECK(oracle::max_abs_diff(fl, fp) <= 1e-12 * oracle::max_abs(fl));

    const auto out = vec(apply_fractional_p_laplacian(u, 0.4, 3.0));
    const auto ref = oracle::fractional_p(u.data(), g.axis().h, 0.4, 3.0);
    for (int i = 0; i < 17; ++i) CHECK(out[i] == Approx(ref[i]).epsilon(1e-6));

    const Grid sym = make_interval(-1.0, 1.0, 17);
    const Field odd = Field::sample(sym, [](double x) { return std::sin(2 * x); });
    const auto o = vec(apply_fractional_p_laplacian(odd, 0.6, 1.7));
    for (int i = 0; i < 17; ++i) CHECK(o[i] == Approx(-o[16 - i]).margin(1e-10));

    const auto single = vec(apply_operator(op::Superposition{{{1.0, 0.4, 3.0}}}, u));
    CHECK(single == out);
}

TEST_CASE("anisotropic fractional operator on a box", "[operators]") {
    const Grid b = make_box({0, 1}, {0, 2}, 9, 11);
    const Grid gx = make_interval(0, 1, 9), gy = make_interval(0, 2, 11);
    auto f = [](double x) { return std::sin(pi * x) * (1 + x); };
    auto gfun = [](double y) { return y * (2 - y); };
    const Field prod = Field::sample(b, [&](double x, double y) { return f(x) * gfun(y); });
    const Field fx = Field::sample(gx, f), gy_ = Field::sample(gy, gfun);
    const double s = 0.4;
    const auto Lf = vec(apply_fractional_laplacian(fx, s)), Lg = vec(apply_fractional_laplacian(gy_, s));
    const auto out = vec(apply_anisotropic_fractional(prod, {1, 1}, {s, s}));
    for (int j = 0; j < 11; ++j)
        for (int i = 0; i < 9; ++i)
            CHECK(out[i + 9 * j] == Approx(gy_[j] * Lf[i] + fx[i] * Lg[j]).epsilon(1e-10));

    const Grid sq = make_box({0, 1}, {0, 1}, 9, 9);
    const Field u(sq, oracle::random_values(81, 7));
    const auto an = vec(apply_anisotropic_fractional(u, {2.0, 0.5}, {0.3, 0.7}));
    const double h = sq.axis(0).h;
    std::vector<double> ref(81, 0.0), line(9);
    for (int j = 0; j < 9; ++j) {
        for (int i = 0; i < 9; ++i) line[i] = u[i + 9 * j];
        const auto r = oracle::fractional_p(line, h, 0.3, 2.0);
        for (int i = 0; i < 9; ++i) ref[i + 9 * j] += 2.0 * r[i];
    }
    for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) line[j] = u[i + 9 * j];
        const auto r = oracle::fractional_p(line, h, 0.7, 2.0);
        for (int j = 0; j < 9; ++j) ref[i + 9 * j] += 0.5 * r[j];
    }
    CHECK(oracle::max_abs_diff(an, ref) <= 1e-8 * oracle::max_abs(ref));
}

TEST_CASE("porous medium operators", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 17);
    const Field u = bump(g);
    CHECK(vec(apply_porous_medium_I(u, 0.5, 1.0)) == vec(apply_fractional_laplacian(u, 0.5)));

    std::vector<double> sq = u.data();
    for (auto& x : sq) x = x * x;
    const auto ref = oracle::fractional_p(sq, g.axis().h, 0.5, 2.0);
    const auto out = vec(apply_porous_medium_I(u, 0.5, 2.0));
    for (int i = 0; i < 17; ++i) CHECK(out[i] == Approx(ref[i]).epsilon(1e-8));

    // Compactly supported bump: the flux vanishes on both boundary faces.
    const Field cb = Field::sample(g, [](double x) { return std::pow(std::max(0.0, 0.09 - (x - 0.5) * (x - 0.5)), 2); });
    const auto pm = vec(apply_porous_medium_II(cb, 0.25));
    double total = 0.0;
    for (double x : pm) total += x * g.axis().h;
    CHECK(std::abs(total) <= 1e-14 * oracle::max_abs(pm));

    // Riesz potential of the interpolant by quadrature, then the same flux form.
    const double s = 0.25, h = g.axis().h;
    const auto& v = u.data();
    auto interp = [&](double y) { return u.value_at(y); };
    std::vector<double> R(19);
    for (int k = -1; k <= 17; ++k) {
        const double x = g.axis().a + (k + 1) * h;
        auto f = [&](double y) { return y == x ? 0.0 : interp(y) * std::pow(std::abs(x - y), 2 * s - 1); };
        double acc = 0.0;
        for (int c = 0; c <= 17; ++c) {
            const double lo = c * h, hi = (c + 1) * h;
            acc += oracle::ts(f, lo, hi);
        }
        R[k + 1] = acc;
    }
    std::vector<double> flux(18), ref2(17);
    for (int f = 0; f <= 17; ++f) {
        const double ul = f > 0 ? v[f - 1] : 0.0, ur = f < 17 ? v[f] : 0.0;
        flux[f] = 0.5 * (ul + ur) * (R[f + 1] - R[f]) / h;
    }
    for (int i = 0; i < 17; ++i) ref2[i] = -(flux[i + 1] - flux[i]) / h;
    const auto pm2 = vec(apply_porous_medium_II(u, s));
    CHECK(oracle::max_abs_diff(pm2, ref2) <= 1e-6 * oracle::max_abs(ref2));
}

TEST_CASE("fractional mean curvature against quadrature of F", "[operators]") {
    const double s = 0.5;
    auto F = [&](double r) {
        return oracle::gk([&](double t) { return std::pow(1 + t * t, -(2 + s) / 2); }, 0.0, std::abs(r)) *
               (r < 0 ? -1.0 : 1.0);
    };
    const Grid g = make_interval(0.0, 1.0, 17);
    const Field u = bump(g);
    const double h = g.axis().h;
    const oracle::Weights w{h, s, 1.0};
    std::vector<double> pw(17);
    for (int d = 1; d < 17; ++d) pw[d] = w.pair(0, d);
    const auto out = vec(apply_fractional_mean_curvature(u, s));
    for (int i = 0; i < 17; ++i) {
        double ref = 0.0;
        for (int j = 0; j < 17; ++j)
            if (j != i) ref += F((u[i] - u[j]) / (std::abs(i - j) * h)) * pw[std::abs(i - j)];
        for (double D : {(i + 1) * h, (17 - i) * h}) {
            ref += F(u[i] / D) * w.near(static_cast<int>(std::lround(D / h)));
            ref += oracle::to_infinity([&](double r) { return F(u[i] / r) * std::pow(r, -1 - s); }, D);
        }
        CHECK(out[i] == Approx(ref).epsilon(1e-5));
    }

    const detail::CurvatureProfile prof(0.3);
    CHECK(prof(0.0) == 0.0);
    CHECK(prof(1e300) == prof.saturation());
    CHECK(prof(-2.0) == -prof(2.0));
    double prev = -1.0;
    for (double r = 0.0; r < 50.0; r += 0.01) {
        CHECK(prof(r) >= prev);
        prev = prof(r);
    }
}

TEST_CASE("Kirchhoff operators", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 199);
    const Field u = Field::sample(g, [](double x) { return std::sin(pi * x); });
    CHECK(vec(apply_kirchhoff(u, {1.0, 0.0})) == vec(apply_laplacian(u)));
    CHECK(vec(apply_kirchhoff(u, {1.0, 0.0}, 0.4)) == vec(apply_fractional_laplacian(u, 0.4)));
    CHECK(oracle::max_abs(vec(apply_kirchhoff(Field(g), {0.0, 1.0}))) == 0.0);
    CHECK(oracle::max_abs(vec(apply_kirchhoff(Field(g), {0.0, 1.0}, 0.5))) == 0.0);
    const auto k = vec(apply_kirchhoff(u, {0.0, 1.0}));
    for (int i = 0; i < 199; i += 7) {
        const double expect = pi * pi / 2 * pi * pi * u[i];
        CHECK(k[i] == Approx(expect).epsilon(0.01));
    }
}

TEST_CASE("magnetic operators", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 33);
    const Field re = bump(g);
    const ComplexField z = to_complex(re);
    const auto zero = MagneticPotential::constant(0.0, 33);
    const auto m0 = apply_magnetic(z, zero);
    const auto lap = vec(apply_laplacian(re));
    const auto f0 = apply_magnetic(z, zero, 0.6);
    const auto fl = vec(apply_fractional_laplacian(re, 0.6));
    for (int i = 0; i < 33; ++i) {
        CHECK(m0[i].imag() == 0.0);
        CHECK(m0[i].real() == lap[i]);
        CHECK(f0[i].imag() == 0.0);
        CHECK(f0[i].real() == Approx(fl[i]).epsilon(1e-12));
    }

    const double A = 1.0, h = g.axis().h;
    const ComplexField w =
        ComplexField::sample(g, [](double x) { return std::sin(pi * x) * std::exp(Complex(0.0, x)); });
    const auto out = apply_magnetic(w, MagneticPotential::constant(A, 33));
    for (int i = 0; i < 33; ++i) {
        const Complex l = i > 0 ? w[i - 1] : Complex{}, r = i < 32 ? w[i + 1] : Complex{};
        const Complex d2 = (r - 2.0 * w[i] + l) / (h * h), d1 = (r - l) / (2 * h);
        const Complex ref = -d2 + 2.0 * Complex(0, 1) * A * d1 + A * A * w[i];
        CHECK(std::abs(out[i] - ref) <= 1e-8 * std::abs(ref) + 1e-12);
    }
}

TEST_CASE("linear operators are additive and homogeneous", "[operators]") {
    const Grid g = make_interval(-1.0, 1.0, 25);
    const Field u(g, oracle::random_values(25, 11)), v(g, oracle::random_values(25, 12));
    const std::vector<OperatorSpec> specs = {op::Laplacian{}, op::BiLaplacian{}, op::FractionalLaplacian{0.3},
                                             op::FractionalLaplacian{0.9}};
    for (const auto& spec : specs) {
        const auto lhs = vec(apply_operator(spec, combine(2.5, u, -0.75, v)));
        const auto a = vec(apply_operator(spec, u)), b = vec(apply_operator(spec, v));
        std::vector<double> rhs(25);
        for (int i = 0; i < 25; ++i) rhs[i] = 2.5 * a[i] - 0.75 * b[i];
        CHECK(oracle::max_abs_diff(lhs, rhs) <= 1e-12 * oracle::max_abs(rhs));
    }
    const ComplexField zu = ComplexField::sample(g, [](double x) { return std::polar(1 - x * x, 2 * x); });
    const ComplexField zv = ComplexField::sample(g, [](double x) { return Complex(x * x * x, std::cos(x)); });
    const Complex a(0.3, -1.2), b(2.0, 0.5);
    const auto A = MagneticPotential::sample(g.axis(), [](double x) { return std::sin(3 * x); });
    for (const std::optional<double> s : {std::optional<double>{}, std::optional<double>{0.4}}) {
        const auto lhs = apply_magnetic(combine(a, zu, b, zv), A, s);
        const auto ru = apply_magnetic(zu, A, s), rv = apply_magnetic(zv, A, s);
        double err = 0.0, scale = 0.0;
        for (int i = 0; i < 25; ++i) {
            const Complex rhs = a * ru[i] + b * rv[i];
            err = std::max(err, std::abs(lhs[i] - rhs));
            scale = std::max(scale, std::abs(rhs));
        }
        CHECK(err <= 1e-12 * scale);
    }
    const Grid box = make_box({0, 1}, {0, 1}, 7, 8);
    const Field bu(box, oracle::random_values(56, 1)), bv(box, oracle::random_values(56, 2));
    const op::AnisotropicFractional an{{2, 0.5}, {0.3, 0.7}};
    const auto lhs = vec(apply_operator(an, combine(1.5, bu, 4.0, bv)));
    const auto a1 = vec(apply_operator(an, bu)), b1 = vec(apply_operator(an, bv));
    std::vector<double> rhs(56);
    for (int i = 0; i < 56; ++i) rhs[i] = 1.5 * a1[i] + 4.0 * b1[i];
    CHECK(oracle::max_abs_diff(lhs, rhs) <= 1e-12 * oracle::max_abs(rhs));
}

TEST_CASE("bilaplacian is the square of the Laplacian", "[operators]") {
    const Grid g = make_interval(0.0, 2.0, 31);
    const Field u(g, oracle::random_values(31, 3));
    CHECK(vec(apply_bilaplacian(u)) == vec(apply_laplacian(apply_laplacian(u))));
}

TEST_CASE("non-magnetic operators commute with reflection", "[operators]") {
    const Grid g = make_interval(-0.5, 1.5, 23);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Field u(g, oracle::random_values(23, 100 + seed));
        for (const auto& spec : real_interval_specs()) {
            INFO(operator_name(spec));
            const auto lhs = vec(apply_operator(spec, reflect(u)));
            const auto rhs = vec(reflect(apply_operator(spec, u)));
            CHECK(oracle::max_abs_diff(lhs, rhs) <= 1e-12 * (1.0 + oracle::max_abs(rhs)));
        }
    }
    const Grid box = make_box({0, 1}, {0, 2}, 7, 9);
    const Field bu(box, oracle::random_values(63, 5));
    const op::AnisotropicFractional an{{2, 0.5}, {0.3, 0.7}};
    CHECK(oracle::max_abs_diff(vec(apply_operator(an, reflect(bu))), vec(reflect(apply_operator(an, bu)))) <= 1e-12 * 100);
}

TEST_CASE("lagged matrices reproduce the operator", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 19);
    const Field u(g, oracle::random_values(19, 21));
    for (const auto& spec : real_interval_specs()) {
        INFO(operator_name(spec));
        const DiscreteOperator D(spec, g);
        const auto A = D.lagged_matrix(u.values());
        const Eigen::Map<const Eigen::VectorXd> x(u.data().data(), 19);
        const Eigen::VectorXd Ax = A * x;
        const auto Nu = D.apply(u.values());
        double err = 0.0;
        for (int i = 0; i < 19; ++i) err = std::max(err, std::abs(Ax[i] - Nu[i]));
        CHECK(err <= 1e-8 * (1.0 + oracle::max_abs(Nu)));
        if (D.tridiagonal())
            for (int i = 0; i < 19; ++i)
                for (int j = 0; j < 19; ++j)
                    if (std::abs(i - j) > 1) CHECK(A(i, j) == 0.0);
    }
    const auto Apot = MagneticPotential::sample(g.axis(), [](double x) { return 1 + x; });
    const ComplexField z = ComplexField::sample(g, [](double x) { return std::polar(x * (1 - x), 4 * x); });
    for (const auto& spec : {OperatorSpec{op::Magnetic{Apot}}, OperatorSpec{op::FractionalMagnetic{0.3, Apot}}}) {
        const DiscreteOperator D(spec, g);
        const Eigen::MatrixXcd A = D.lagged_matrix(z.values());
        const Eigen::Map<const Eigen::VectorXcd> x(z.data().data(), 19);
        const Eigen::VectorXcd Ax = A * x;
        const auto Nu = D.apply(z.values());
        for (int i = 0; i < 19; ++i) CHECK(std::abs(Ax[i] - Nu[i]) <= 1e-10 * (1 + std::abs(Nu[i])));
        if (std::holds_alternative<op::FractionalMagnetic>(spec)) CHECK((A - A.adjoint()).norm() <= 1e-12 * A.norm());
    }
}

TEST_CASE("dissipation pairing", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 199);
    const Field u = Field::sample(g, [](double x) { return std::sin(pi * x); });
    CHECK(dissipation_pairing(u, 2.0, op::Laplacian{}) == Approx(pi * pi / 2).epsilon(0.01));
    CHECK(dissipation_pairing(Field(g), 3.0, op::FractionalLaplacian{0.5}) == 0.0);
    for (double s : {0.2, 0.5, 0.85}) {
        const double D = dissipation_pairing(u, 2.0, op::FractionalLaplacian{s});
        CHECK(D == Approx(0.5 * gagliardo_seminorm_sq(u, s)).epsilon(1e-8));
    }
}

TEST_CASE("every operator is dissipative on random Dirichlet fields", "[operators]") {
    const Grid g = make_interval(0.0, 1.0, 15);
    auto specs = real_interval_specs();
    for (const auto& spec : specs) {
        INFO(operator_name(spec));
        const DiscreteOperator D(spec, g);
        // The porous mobility u (second porous operator) is only sign-definite on nonnegative data.
        const bool nonneg = std::holds_alternative<op::PorousMediumII>(spec);
        const bool only_l2 = std::holds_alternative<op::BiLaplacian>(spec);
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto v = oracle::random_values(15, 5000 + seed, nonneg ? 0.0 : -1.0, 1.0);
            const auto Nu = D.apply(std::span<const double>(v));
            double scale = 0.0;
            for (int i = 0; i < 15; ++i) scale += std::abs(v[i] * Nu[i]) * g.axis().h;
            for (double ell : {2.0, 3.0, 4.0}) {
                if (only_l2 && ell != 2.0) continue;
                const double P = pairing<double>(v, Nu, ell, g.cell_volume());
                CHECK(P >= -1e-10 * scale);
            }
        }
    }
    for (const auto& spec : {OperatorSpec{op::Magnetic{MagneticPotential::constant(2.0, 15)}},
                                    OperatorSpec{op::FractionalMagnetic{0.4, MagneticPotential::sample(
                                                                                 g.axis(), [](double x) {
                                                                                     return 3 * x;
                                                                                 })}}}) {
        INFO(operator_name(spec));
        const DiscreteOperator D(spec, g);
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto re = oracle::random_values(15, 9000 + seed), im = oracle::random_values(15, 19000 + seed);
            std::vector<Complex> v(15);
            for (int i = 0; i < 15; ++i) v[i] = {re[i], im[i]};
            const auto Nu = D.apply(std::span<const Complex>(v));
            double scale = 0.0;
            for (int i = 0; i < 15; ++i) scale += std::abs(v[i]) * std::abs(Nu[i]) * g.axis().h;
            for (double ell : {2.0, 3.0, 4.0}) CHECK(pairing<Complex>(v, Nu, ell, g.cell_volume()) >= -1e-10 * scale);
        }
    }
}
