#pragma once

#include "swr/grid.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <utility>

namespace swr {

struct Mollifier {
    double eps = 0.1;
    int order = 4;

    void validate() const {
        require(eps > 0, "mollifier radius must be positive");
        require(order >= 1, "mollifier order must be a positive integer");
    }

    // 1 / int_{-1}^{1} (1-u^2)^M du as an exact fraction.
    std::pair<long long, long long> sigma_fraction() const {
        long long num = 1, den = 2;
        for (int k = 1; k <= order; ++k) {
            num *= 2 * k + 1;
            den *= 2 * k;
            const long long g = std::gcd(num, den);
            num /= g;
            den /= g;
        }
        return {num, den};
    }
    double sigma() const {
        const auto [n, d] = sigma_fraction();
        return static_cast<double>(n) / static_cast<double>(d);
    }

    double operator()(double x) const {
        const double u = x / eps;
        if (std::abs(u) >= 1.0) return 0.0;
        return sigma() / eps * std::pow(1.0 - u * u, order);
    }
};

inline double mollifier_value(const Mollifier& m, double x) { return m(x); }

// (f * B_eps)(x) by adaptive Gauss-Kronrod over the bump support.
inline double mollify(const std::function<double(double)>& f, const Mollifier& m, double x, double tol = 1e-12) {
    auto g = [&](double s) { return f(x - s) * m(s); };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, -m.eps, m.eps, 20, tol, &err);
    return v;
}

enum class CoulombSmoothing {
    radial,  // potential of a radially symmetric unit charge with the bump profile
    line,    // literal 1-d convolution; exists only outside the bump support
};

// Smoothed attractive Coulomb potential G_eps(x) approximating -1/|x|.
class SmoothedCoulomb {
public:
    SmoothedCoulomb() = default;
    SmoothedCoulomb(Mollifier m, bool scale_4pi = false, CoulombSmoothing mode = CoulombSmoothing::radial)
        : m_(m), scale_(scale_4pi ? 1.0 / (4.0 * pi) : 1.0), mode_(mode) {
        m_.validate();
        // P(1) = int_0^1 (1-v^2)^M v^2 dv
        p1_ = radial_moment(1.0);
    }

    const Mollifier& mollifier() const { return m_; }
    CoulombSmoothing mode() const { return mode_; }

    double operator()(double x) const { return scale_ * (mode_ == CoulombSmoothing::radial ? radial(x) : line(x)); }

    std::vector<double> tabulate(std::span<const double> xs) const {
        std::vector<double> out;
        out.reserve(xs.size());
        for (double x : xs) out.push_back((*this)(x));
        return out;
    }

private:
    double radial_moment(double u) const {
        double s = 0.0, binom = 1.0;
        for (int k = 0; k <= m_.order; ++k) {
            s += ((k % 2) ? -1.0 : 1.0) * binom * std::pow(u, 2 * k + 3) / (2 * k + 3);
            binom = binom * (m_.order - k) / (k + 1);
        }
        return s;
    }

    double radial(double x) const {
        const double r = std::abs(x), eps = m_.eps;
        if (r >= eps) return -1.0 / r;
        const double u = r / eps;
        // P(u)/r written without the 1/r to stay finite at the centre
        double pr = 0.0, binom = 1.0;
        for (int k = 0; k <= m_.order; ++k) {
            pr += ((k % 2) ? -1.0 : 1.0) * binom * std::pow(u, 2 * k + 2) / (2 * k + 3);
            binom = binom * (m_.order - k) / (k + 1);
        }
        pr /= eps;
        const double tail = std::pow(1.0 - u * u, m_.order + 1) / (2.0 * (m_.order + 1) * eps);
        return -(pr + tail) / p1_;
    }

    double line(double x) const {
        const double eps = m_.eps;
        auto integrand = [&](double s) {
            const double d = std::abs(x - s);
            if (d == 0.0) return 0.0;  // only reached at an endpoint where the bump vanishes
            return -m_(s) / d;
        };
        using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
        double err1 = 0.0, err2 = 0.0, v = 0.0;
        const double tol = 1e-10;
        if (x > -eps && x < eps) {
            v = GK::integrate(integrand, -eps, x, 25, 1e-13, &err1) + GK::integrate(integrand, x, eps, 25, 1e-13, &err2);
        } else {
            v = GK::integrate(integrand, -eps, eps, 25, 1e-13, &err1);
        }
        if (!std::isfinite(v) || err1 + err2 > tol)
            throw Error("smoothed Coulomb: quadrature did not converge at x=" + std::to_string(x) +
                        " (error estimate " + std::to_string(err1 + err2) + ")");
        return v;
    }

    Mollifier m_{};
    double scale_ = 1.0;
    CoulombSmoothing mode_ = CoulombSmoothing::radial;
    double p1_ = 1.0;
};

inline SmoothedCoulomb smoothed_coulomb(const Mollifier& m, bool scale_4pi = false,
                                        CoulombSmoothing mode = CoulombSmoothing::radial) {
    return SmoothedCoulomb(m, scale_4pi, mode);
}

struct BarrierSpec {
    double x_b = 2.0;
    double eps_b = 0.5;
    double v_inf = 1e3;

    void validate() const {
        require(x_b > 0 && eps_b > 0 && v_inf > 0, "barrier needs x_b, eps_b, V_inf > 0");
    }
};

// C^2 quintic step: 0 below -w/2, 1 above w/2.
inline double smoothstep(double u, double w) {
    if (u <= -0.5 * w) return 0.0;
    if (u >= 0.5 * w) return 1.0;
    const double t = (u + 0.5 * w) / w;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

inline double smoothstep_derivative(double u, double w) {
    if (u <= -0.5 * w || u >= 0.5 * w) return 0.0;
    const double t = (u + 0.5 * w) / w;
    return 30.0 * t * t * (t - 1.0) * (t - 1.0) / w;
}

inline double barrier_value(const BarrierSpec& b, double x) { return smoothstep(std::abs(x) - b.x_b, b.eps_b) * b.v_inf; }
inline double a_eps(const BarrierSpec& b, double x) { return 1.0 - smoothstep(std::abs(x) - b.x_b, b.eps_b); }

struct NucleusSet {
    std::vector<double> positions;
    std::vector<double> charges;

    void validate() const {
        require(positions.size() == charges.size(), "nucleus positions and charges differ in length");
        for (double z : charges) require(z > 0, "nuclear charges must be positive");
    }
    std::size_t size() const { return positions.size(); }
};

inline double softcore_potential(const NucleusSet& n, double eta, double x) {
    double v = 0.0;
    for (std::size_t a = 0; a < n.size(); ++a) {
        const double d = x - n.positions[a];
        v -= n.charges[a] / std::sqrt(d * d + eta * eta);
    }
    return v;
}

enum class Polarization { circular, linear_scalar };

struct LaserField {
    double E0 = 1.0, omega0 = 8.0, nu0 = 10.0, T = 2.5;
    Polarization polarization = Polarization::circular;

    std::pair<double, double> operator()(double t) const {
        const double env = E0 * std::exp(-nu0 * (0.5 * T - t) * (0.5 * T - t));
        const double ex = env * std::cos(omega0 * t);
        if (polarization == Polarization::linear_scalar) return {ex, ex};
        return {ex, env * std::sin(omega0 * t)};
    }
};

inline std::pair<double, double> laser_value(const LaserField& f, double t) { return f(t); }

enum class NuclearModel { none, softcore, mollified, coulomb };
enum class InteractionModel { none, softcore, mollified };

// V(x1,x2) = v(x1) + v(x2) + w(x1 - x2).
struct PotentialSpec {
    NuclearModel nuclear = NuclearModel::none;
    NucleusSet nuclei;
    double eta = 0.2;
    InteractionModel interaction = InteractionModel::none;
    double eta_ee = 0.2;
    Mollifier mollifier{0.1, 4};
    bool scale_4pi = false;
    CoulombSmoothing smoothing = CoulombSmoothing::radial;

    bool is_zero() const { return nuclear == NuclearModel::none && interaction == InteractionModel::none; }

    std::function<double(double)> one_body() const {
        switch (nuclear) {
            case NuclearModel::none: return [](double) { return 0.0; };
            case NuclearModel::softcore: return [n = nuclei, e = eta](double x) { return softcore_potential(n, e, x); };
            case NuclearModel::mollified: {
                SmoothedCoulomb g(mollifier, scale_4pi, smoothing);
                return [n = nuclei, g](double x) {
                    double v = 0.0;
                    for (std::size_t a = 0; a < n.size(); ++a) v += n.charges[a] * g(x - n.positions[a]);
                    return v;
                };
            }
            case NuclearModel::coulomb:
                return [n = nuclei](double x) {
                    double v = 0.0;
                    for (std::size_t a = 0; a < n.size(); ++a) v -= n.charges[a] / std::abs(x - n.positions[a]);
                    return v;
                };
        }
        return [](double) { return 0.0; };
    }

    std::function<double(double)> pair_term() const {
        switch (interaction) {
            case InteractionModel::none: return [](double) { return 0.0; };
            case InteractionModel::softcore:
                return [e = eta_ee](double r) { return 1.0 / std::sqrt(r * r + e * e); };
            case InteractionModel::mollified: {
                SmoothedCoulomb g(mollifier, scale_4pi, smoothing);
                return [g](double r) { return -g(r); };
            }
        }
        return [](double) { return 0.0; };
    }

    // Row-major tabulation on the global grid (x1 slow).
    std::vector<double> tabulate(const GlobalGrid& grid) const {
        std::vector<double> v(grid.size(), 0.0);
        if (is_zero()) return v;
        const auto vn = one_body();
        const auto w = pair_term();
        std::vector<double> a1(grid.x1.n), a2(grid.x2.n);
        for (int i = 0; i < grid.x1.n; ++i) a1[i] = vn(grid.x1.x(i));
        for (int j = 0; j < grid.x2.n; ++j) a2[j] = vn(grid.x2.x(j));
        for (int i = 0; i < grid.x1.n; ++i)
            for (int j = 0; j < grid.x2.n; ++j) v[grid.at(i, j)] = a1[i] + a2[j] + w(grid.x1.x(i) - grid.x2.x(j));
        return v;
    }
};

inline void dump_profile_csv(std::ostream& os, std::span<const double> xs, std::span<const double> values) {
    require(xs.size() == values.size(), "profile dump: length mismatch");
    os << "x,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < xs.size(); ++i) os << xs[i] << ',' << values[i] << '\n';
}

}  // namespace swr
