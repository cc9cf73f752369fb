#ifndef PLANEPARTS_QSPECIAL_HPP
#define PLANEPARTS_QSPECIAL_HPP

#include <complex>

namespace planeparts {

using Complex = std::complex<double>;

/// Geometric-weight parameter q = exp(-r), kept together with r so callers
/// can use whichever form is natural without round-trip drift.
struct QParameter {
    double q;  // in (0,1)
    double r;  // r = -log(q) > 0

    static QParameter from_q(double q);
    static QParameter from_r(double r);
};

/// Absolute truncation/quadrature target for series and products.
struct Tolerance {
    double abs_tol = 1e-14;

    static Tolerance of(double t);
};

// (x; q)_infty = prod_{k>=0} (1 - x q^k), truncated at the first k with
// |x| q^k < tol. The dropped tail multiplies the result by
// exp(O(tol/(1-q))).
Complex qpochhammer(Complex x, const QParameter& q, Tolerance tol = {});

// log (x; q)_infty as the sum of principal logs of the factors. Well defined
// for |x| < 1 (every factor then has positive real part).
Complex log_qpochhammer(Complex x, const QParameter& q, Tolerance tol = {});

// M = prod_{n>=1} (1 - q^n)^n, truncated once n q^n < tol.
double macmahon_constant(const QParameter& q, Tolerance tol = {});

// Li2(z) = sum_{n>=1} z^n / n^2 continued to C minus the cut (1, +inf).
Complex li2(Complex z);

// dilog(w) = Li2(1 - w); cut on w in (-inf, 0). Throws std::domain_error on
// cut contact.
Complex dilog(Complex w);

// Phi(t, z): ratio of q-Pochhammer symbols, two branches in t. Throws
// std::domain_error when a denominator factor vanishes within tol.
Complex phi(long long t, Complex z, const QParameter& q, Tolerance tol = {});

// S(z; tau, chi) = -(tau/2 + chi) log z - dilog(1 - 1/z) + dilog(1 - e^-tau z)
// for tau >= 0; for tau < 0 dispatches to the companion function in |tau|.
Complex action_S(Complex z, double tau, double chi);

// | -log (z;q)_infty - dilog(1-z)/r | for q = e^{-r}; stays bounded as r -> 0.
double dilog_estimate_check(Complex z, double r, Tolerance tol = {});

}  // namespace planeparts

#endif  // PLANEPARTS_QSPECIAL_HPP
