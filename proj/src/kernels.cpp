#include "planeparts/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace planeparts {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kImagBudget = 1e-9;

Complex cpow_int(Complex z, long long n) {
    if (n < 0) return 1.0 / cpow_int(z, -n);
    Complex acc{1.0, 0.0};
    while (n > 0) {
        if (n & 1) acc *= z;
        z *= z;
        n >>= 1;
    }
    return acc;
}

// Integer contour exponent: a = h + (|t|+1)/2 = (h2 + |t| + 1)/2.
long long h_exponent(const LatticePoint& p) {
    return (static_cast<long long>(p.h2) + std::abs(p.t) + 1) / 2;
}

double contour_offset(const QParameter& q) {
    return std::min((1.0 / std::sqrt(q.q) - 1.0) / 2.0, 0.25);
}

// Trapezoid evaluation of the double contour integral at n nodes per circle.
Complex kq_level(const LatticePoint& p1, const LatticePoint& p2, const QParameter& q,
                 double radius_z, double radius_w, int n) {
    const long long a1 = h_exponent(p1);
    const long long a2 = h_exponent(p2);
    std::vector<Complex> u(n), v(n), zs(n), ws(n);
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * kPi * k / n;
        const Complex z = std::polar(radius_z, th);
        const Complex w = std::polar(radius_w, th);
        zs[k] = z;
        ws[k] = w;
        u[k] = phi(p1.t, z, q) * cpow_int(z, -a1) * z;
        // The w-measure carries dw/w: the Jacobian of w(θ) cancels that power,
        // leaving w^{a2} with no extra factor.
        v[k] = cpow_int(w, a2) / phi(p2.t, w, q);
    }
    Complex sum{0.0, 0.0};
    for (int k = 0; k < n; ++k) {
        Complex row{0.0, 0.0};
        for (int l = 0; l < n; ++l) row += v[l] / (zs[k] - ws[l]);
        sum += u[k] * row;
    }
    return sum / (static_cast<double>(n) * static_cast<double>(n));
}

struct GaussRule {
    std::array<double, 8> x;
    std::array<double, 8> w;
};

// 8-point Gauss-Legendre rule on [-1, 1].
const GaussRule& gauss8() {
    static const GaussRule rule = [] {
        GaussRule g;
        const double xs[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                              0.9602898564975363};
        const double ws[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                              0.1012285362903763};
        for (int i = 0; i < 4; ++i) {
            g.x[2 * i] = -xs[i];
            g.x[2 * i + 1] = xs[i];
            g.w[2 * i] = ws[i];
            g.w[2 * i + 1] = ws[i];
        }
        return g;
    }();
    return rule;
}

// Composite 8-point Gauss-Legendre along the straight segment [a, b].
template <typename F>
Complex segment_gauss(const F& f, Complex a, Complex b, int panels) {
    const GaussRule& g = gauss8();
    const Complex step = (b - a) / static_cast<double>(panels);
    Complex sum{0.0, 0.0};
    for (int p = 0; p < panels; ++p) {
        const Complex mid = a + (static_cast<double>(p) + 0.5) * step;
        Complex local{0.0, 0.0};
        for (int i = 0; i < 8; ++i) local += g.w[i] * f(mid + 0.5 * g.x[i] * step);
        sum += local;
    }
    return sum * step * 0.5;
}

}  // namespace

Complex kernel_Kq_radii(const LatticePoint& p1, const LatticePoint& p2, const QParameter& q,
                        double radius_z, double radius_w, const QuadratureConfig& cfg) {
    if (!occupancy_valid(p1) || !occupancy_valid(p2)) {
        throw std::domain_error("kernel_Kq: points must be occupancy-valid");
    }
    if (cfg.n_nodes < 16 || (cfg.n_nodes & (cfg.n_nodes - 1)) != 0) {
        throw std::invalid_argument("kernel_Kq: n_nodes must be a power of two >= 16");
    }

    // Nearest Phi singularities: poles of Phi(t1, .) at |z| = q^{-1/2 - max(t1,0)}
    // and beyond, poles of 1/Phi(t2, .) at |w| = q^{1/2 + max(-t2,0)} and below.
    const double margin = contour_offset(q) / 2.0;
    const double z_pole = std::pow(q.q, -0.5 - std::max(p1.t, 0));
    const double w_pole = std::pow(q.q, 0.5 + std::max(-p2.t, 0));
    if (radius_z >= z_pole - margin || radius_w <= w_pole + margin) {
        throw std::domain_error("kernel_Kq: contour within margin of a Phi pole");
    }
    if (radius_z <= 0.0 || radius_w <= 0.0 || std::abs(radius_z - radius_w) < 1e-12) {
        throw std::domain_error("kernel_Kq: invalid contour radii");
    }

    int n = cfg.n_nodes;
    Complex prev = kq_level(p1, p2, q, radius_z, radius_w, n);
    for (int d = 0; d < cfg.max_doublings; ++d) {
        n *= 2;
        const Complex cur = kq_level(p1, p2, q, radius_z, radius_w, n);
        if (std::abs(cur - prev) < cfg.tol) return cur;
        prev = cur;
    }
    throw std::runtime_error("kernel_Kq: quadrature failed to converge");
}

Complex kernel_Kq(const LatticePoint& p1, const LatticePoint& p2, const QParameter& q,
                  const QuadratureConfig& cfg) {
    const double eps = contour_offset(q);
    const bool plus = p1.t >= p2.t;
    const double radius_z = plus ? 1.0 + eps : 1.0 - eps;
    const double radius_w = plus ? 1.0 - eps : 1.0 + eps;
    return kernel_Kq_radii(p1, p2, q, radius_z, radius_w, cfg);
}

Complex kernel_sine(int dt, int dh2, const BulkPoint& bp, const QuadratureConfig& cfg) {
    if (((dt + dh2) % 2 + 2) % 2 != 0) {
        throw std::domain_error("kernel_sine: dh2 + dt must be even");
    }
    // Exponent of w in the integrand (before the 1/w): -dh - dt/2.
    const long long e = -(static_cast<long long>(dh2) + dt) / 2;

    const double rho = std::exp(-bp.tau / 2.0);
    const double x0 =
        dt >= 0 ? std::clamp(rho, 0.1, 0.9) : -std::max(1.0, 2.0 * rho);
    if (std::abs(x0) < 1e-6 || std::abs(x0 - 1.0) < 1e-6) {
        throw std::domain_error("kernel_sine: path anchor collides with a pole");
    }

    auto f = [&](Complex w) { return cpow_int(1.0 - w, dt) * cpow_int(w, e - 1); };
    const Complex zb = std::conj(bp.z);
    const Complex anchor{x0, 0.0};

    int panels = 1;
    Complex prev = segment_gauss(f, zb, anchor, panels) + segment_gauss(f, anchor, bp.z, panels);
    for (int d = 0; d < cfg.max_doublings; ++d) {
        panels *= 2;
        const Complex cur =
            segment_gauss(f, zb, anchor, panels) + segment_gauss(f, anchor, bp.z, panels);
        if (std::abs(cur - prev) < cfg.tol) {
            return cur / Complex{0.0, 2.0 * kPi};
        }
        prev = cur;
    }
    throw std::runtime_error("kernel_sine: quadrature failed to converge");
}

double kernel_sine_equal_time(int dh, const BulkPoint& bp) {
    if (dh == 0) return bp.phi / kPi;
    return std::exp(bp.tau * dh / 2.0) * std::sin(bp.phi * dh) / (kPi * dh);
}

CorrelationKernel::CorrelationKernel(
    Kind kind, std::function<Complex(const LatticePoint&, const LatticePoint&)> eval)
    : kind_(kind), eval_(std::move(eval)) {}

CorrelationKernel CorrelationKernel::finite_q(const QParameter& q, const QuadratureConfig& cfg) {
    return CorrelationKernel(Kind::finite_q, [q, cfg](const LatticePoint& p1,
                                                      const LatticePoint& p2) {
        return kernel_Kq(p1, p2, q, cfg);
    });
}

CorrelationKernel CorrelationKernel::bulk(const BulkPoint& bp, const QuadratureConfig& cfg) {
    return CorrelationKernel(Kind::bulk,
                             [bp, cfg](const LatticePoint& p1, const LatticePoint& p2) {
                                 return kernel_sine(p1.t - p2.t, p1.h2 - p2.h2, bp, cfg);
                             });
}

Complex CorrelationKernel::evaluate(const LatticePoint& p1, const LatticePoint& p2) const {
    return eval_(p1, p2);
}

namespace {

// Determinant by LU with partial pivoting; n is small (pattern sizes).
Complex lu_det(std::vector<Complex> a, std::size_t n) {
    Complex det{1.0, 0.0};
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a[col * n + col]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double cand = std::abs(a[row * n + col]);
            if (cand > best) {
                best = cand;
                pivot = row;
            }
        }
        if (best == 0.0) return {0.0, 0.0};
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
            det = -det;
        }
        det *= a[col * n + col];
        for (std::size_t row = col + 1; row < n; ++row) {
            const Complex factor = a[row * n + col] / a[col * n + col];
            for (std::size_t j = col; j < n; ++j) a[row * n + j] -= factor * a[col * n + j];
        }
    }
    return det;
}

Complex kernel_det(const CorrelationKernel& kernel, std::span<const LatticePoint> pts,
                   const double* gauge) {
    const std::size_t n = pts.size();
    std::vector<Complex> mat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Complex val = kernel.evaluate(pts[i], pts[j]);
            if (gauge) val *= gauge[i] / gauge[j];
            mat[i * n + j] = val;
        }
    }
    return lu_det(std::move(mat), n);
}

void validate_points(std::span<const LatticePoint> pts) {
    for (const LatticePoint& p : pts) {
        if (!occupancy_valid(p)) {
            throw std::domain_error("correlation: point is not occupancy-valid");
        }
    }
    std::vector<LatticePoint> sorted(pts.begin(), pts.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("correlation: points must be distinct");
    }
}

}  // namespace

double correlation(const CorrelationKernel& kernel, std::span<const LatticePoint> pts) {
    if (pts.empty()) return 1.0;
    validate_points(pts);
    const Complex det = kernel_det(kernel, pts, nullptr);
    if (std::abs(det.imag()) >= kImagBudget) {
        throw std::runtime_error("correlation: determinant has a non-real residue");
    }
    double value = det.real();
    if (value < 0.0 && value >= -kImagBudget) {
        std::clog << "correlation: clamping tiny negative value " << value << " to 0\n";
        value = 0.0;
    }
    return value;
}

std::vector<LatticePoint> translate_pattern(const LatticePoint& base, const Pattern& m) {
    std::vector<LatticePoint> out;
    out.reserve(m.size());
    for (const LatticePoint& off : m.offsets()) {
        out.push_back({base.t + off.t, base.h2 + off.h2});
    }
    return out;
}

double covariance(const CorrelationKernel& kernel, const LatticePoint& base1,
                  const LatticePoint& base2, const Pattern& m) {
    if (!translation_admissible(base1) || !translation_admissible(base2)) {
        throw std::invalid_argument("covariance: bases must be translation-admissible");
    }
    const std::vector<LatticePoint> m1 = translate_pattern(base1, m);
    const std::vector<LatticePoint> m2 = translate_pattern(base2, m);
    std::set<LatticePoint, std::less<>> union_set(m1.begin(), m1.end());
    union_set.insert(m2.begin(), m2.end());
    const std::vector<LatticePoint> joint(union_set.begin(), union_set.end());
    return correlation(kernel, joint) - correlation(kernel, m1) * correlation(kernel, m2);
}

double gauge_check(const CorrelationKernel& kernel, std::span<const LatticePoint> pts,
                   std::span<const double> g) {
    if (g.size() != pts.size()) {
        throw std::invalid_argument("gauge_check: one weight per point required");
    }
    for (double gi : g) {
        if (!(gi > 0.0)) throw std::invalid_argument("gauge_check: weights must be positive");
    }
    if (pts.empty()) return 0.0;
    validate_points(pts);
    const Complex plain = kernel_det(kernel, pts, nullptr);
    const Complex conjugated = kernel_det(kernel, pts, g.data());
    return std::abs(plain - conjugated);
}

}  // namespace planeparts
