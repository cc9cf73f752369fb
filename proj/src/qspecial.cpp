#include "planeparts/qspecial.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace planeparts {

QParameter QParameter::from_q(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("QParameter: q must lie in (0,1)");
    }
    return {q, -std::log(q)};
}

QParameter QParameter::from_r(double r) {
    if (!(r > 0.0)) {
        throw std::domain_error("QParameter: r must be positive");
    }
    return {std::exp(-r), r};
}

Tolerance Tolerance::of(double t) {
    if (!(t > 0.0)) {
        throw std::domain_error("Tolerance: abs_tol must be positive");
    }
    return {t};
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2Over6 = kPi * kPi / 6.0;

// Direct series li2(z) = sum z^n / n^2, |z| <= 1/2.
Complex li2_series(Complex z) {
    Complex term = z;
    Complex sum = z;
    for (int n = 2; n < 64; ++n) {
        term *= z;
        const Complex add = term / static_cast<double>(n * n);
        sum += add;
        if (std::abs(add) < 1e-17 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

// li2(z) = sum_{k>=0} c_k u^{k+1} with u = -log(1-z), c_k = B_k/(k+1)!.
// Converges for |u| < 2pi; used on the annulus where neither z nor 1-z is
// small (this includes the sixth roots of unity, where |z| = |1-z| = 1).
Complex li2_bernoulli(Complex u) {
    // Bernoulli numbers B_0..B_34 (odd ones vanish except B_1).
    static const std::array<double, 18> b_even = {
        1.0,
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
        43867.0 / 798.0,
        -174611.0 / 330.0,
        854513.0 / 138.0,
        -236364091.0 / 2730.0,
        8553103.0 / 6.0,
        -23749461029.0 / 870.0,
        8615841276005.0 / 14322.0,
        -7709321041217.0 / 510.0,
        2577687858367.0 / 6.0,
    };
    static const std::array<double, 18> coeff = [] {
        std::array<double, 18> c{};
        double fact = 1.0;  // (2k+1)!
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (k > 0) fact *= (2.0 * k) * (2.0 * k + 1.0);
            c[k] = b_even[k] / fact;
        }
        return c;
    }();

    const Complex u2 = u * u;
    Complex upow = u;  // u^{2k+1}
    Complex sum = u - u2 / 4.0;  // k=0 even term plus the lone odd term (B_1)
    for (std::size_t k = 1; k < coeff.size(); ++k) {
        upow *= u2;
        const Complex add = coeff[k] * upow;
        sum += add;
        if (std::abs(add) < 1e-17 * (1.0 + std::abs(sum))) break;
    }
    return sum;
}

}  // namespace

Complex li2(Complex z) {
    if (z == Complex{0.0, 0.0}) return {0.0, 0.0};
    if (z == Complex{1.0, 0.0}) return {kPi2Over6, 0.0};

    const double az = std::abs(z);
    if (az > 1.0) {
        // Inversion onto the unit disk.
        const Complex lognz = std::log(-z);
        return -kPi2Over6 - 0.5 * lognz * lognz - li2(1.0 / z);
    }
    if (az <= 0.5) return li2_series(z);
    if (std::abs(1.0 - z) <= 0.5) {
        return kPi2Over6 - std::log(z) * std::log(1.0 - z) - li2_series(1.0 - z);
    }
    return li2_bernoulli(-std::log(1.0 - z));
}

Complex dilog(Complex w) {
    if (w.imag() == 0.0 && w.real() < 0.0) {
        throw std::domain_error("dilog: argument on the branch cut (-inf, 0)");
    }
    return li2(1.0 - w);
}

Complex qpochhammer(Complex x, const QParameter& q, Tolerance tol) {
    Complex prod{1.0, 0.0};
    double scale = std::abs(x);
    double qk = 1.0;
    while (scale * qk >= tol.abs_tol) {
        prod *= (1.0 - x * qk);
        qk *= q.q;
        if (qk == 0.0) break;
    }
    return prod;
}

Complex log_qpochhammer(Complex x, const QParameter& q, Tolerance tol) {
    Complex sum{0.0, 0.0};
    double scale = std::abs(x);
    double qk = 1.0;
    while (scale * qk >= tol.abs_tol) {
        sum += std::log(1.0 - x * qk);
        qk *= q.q;
        if (qk == 0.0) break;
    }
    return sum;
}

double macmahon_constant(const QParameter& q, Tolerance tol) {
    double log_m = 0.0;
    double qn = 1.0;
    for (int n = 1;; ++n) {
        qn *= q.q;
        if (n * qn < tol.abs_tol) break;
        log_m += n * std::log1p(-qn);
    }
    return std::exp(log_m);
}

Complex phi(long long t, Complex z, const QParameter& q, Tolerance tol) {
    // Phi(t,z) = (q^{1/2}/z;q)/(q^{1/2+t}z;q) for t >= 0,
    //            (q^{1/2-t}/z;q)/(q^{1/2}z;q) for t < 0.
    const double sq = std::sqrt(q.q);
    Complex num_x, den_x;
    if (t >= 0) {
        num_x = sq / z;
        den_x = sq * std::pow(q.q, static_cast<double>(t)) * z;
    } else {
        num_x = sq * std::pow(q.q, static_cast<double>(-t)) / z;
        den_x = sq * z;
    }

    const Complex num = qpochhammer(num_x, q, tol);

    Complex den{1.0, 0.0};
    double scale = std::abs(den_x);
    double qk = 1.0;
    while (scale * qk >= tol.abs_tol) {
        const Complex factor = 1.0 - den_x * qk;
        if (std::abs(factor) < tol.abs_tol) {
            throw std::domain_error("phi: z hits a pole of the denominator product");
        }
        den *= factor;
        qk *= q.q;
        if (qk == 0.0) break;
    }
    return num / den;
}

Complex action_S(Complex z, double tau, double chi) {
    if (tau >= 0.0) {
        return -(tau / 2.0 + chi) * std::log(z) - dilog(1.0 - 1.0 / z) +
               dilog(1.0 - std::exp(-tau) * z);
    }
    const double at = -tau;
    return -(at / 2.0 + chi) * std::log(z) - dilog(1.0 - z) + dilog(1.0 - std::exp(-at) / z);
}

double dilog_estimate_check(Complex z, double r, Tolerance tol) {
    if (std::abs(z) >= 1.0) {
        throw std::domain_error("dilog_estimate_check: requires |z| < 1");
    }
    const QParameter q = QParameter::from_r(r);
    const Complex lhs = -log_qpochhammer(z, q, tol);
    const Complex rhs = li2(z) / r;  // dilog(1 - z)
    return std::abs(lhs - rhs);
}

}  // namespace planeparts
