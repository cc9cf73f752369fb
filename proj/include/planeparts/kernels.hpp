#ifndef PLANEPARTS_KERNELS_HPP
#define PLANEPARTS_KERNELS_HPP

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "planeparts/bulkgeom.hpp"
#include "planeparts/qspecial.hpp"

namespace planeparts {

/// Adaptive contour-quadrature controls. Node counts start at n_nodes
/// (a power of two, >= 16) and double until two successive levels agree
/// within tol, at most max_doublings times.
struct QuadratureConfig {
    int n_nodes = 64;
    int max_doublings = 14;
    double tol = 1e-10;
};

// Finite-q two-point kernel: double contour integral
//   (2 i pi)^{-2} oint oint  Phi(t1,z)/Phi(t2,w) * z^{-a1} w^{a2} / (z - w)
//                            dz (dw / w),
// a_i = h_i + (|t_i|+1)/2, over |z| = 1 +/- eps, |w| = 1 -/+ eps (plus sign
// for t1 >= t2), trapezoid rule on both circles. The dw/w measure is required
// for det(kernel) to reproduce pattern probabilities; it is checked against
// exhaustive enumeration in the tests.
// The imaginary part must come out below 1e-9 and is discarded.
// Throws std::domain_error on invalid points, std::runtime_error when the
// doubling loop fails to converge.
Complex kernel_Kq(const LatticePoint& p1, const LatticePoint& p2, const QParameter& q,
                  const QuadratureConfig& cfg = {});

// Same integral on caller-supplied circle radii. Exposed so the pole-margin
// guard can be exercised; kernel_Kq picks safe radii itself.
Complex kernel_Kq_radii(const LatticePoint& p1, const LatticePoint& p2, const QParameter& q,
                        double radius_z, double radius_w, const QuadratureConfig& cfg);

// Extended sine kernel: (1/2i pi) int from conj(z) to z of
// (1-w)^dt w^{-dh - dt/2} dw / w along a polyline through x0, with
// x0 in (0,1) for dt >= 0 and x0 < 0 for dt < 0. Requires dh2 + dt even.
Complex kernel_sine(int dt, int dh2, const BulkPoint& bp, const QuadratureConfig& cfg = {});

// Equal-time closed form e^{tau dh / 2} sin(phi dh) / (pi dh); dh = 0 gives
// phi / pi by continuity.
double kernel_sine_equal_time(int dh, const BulkPoint& bp);

/// Two-point evaluator feeding determinantal correlations: either the
/// finite-q kernel at parameter q or the bulk kernel at a point of A.
class CorrelationKernel {
  public:
    enum class Kind { finite_q, bulk };

    static CorrelationKernel finite_q(const QParameter& q, const QuadratureConfig& cfg = {});
    static CorrelationKernel bulk(const BulkPoint& bp, const QuadratureConfig& cfg = {});

    Complex evaluate(const LatticePoint& p1, const LatticePoint& p2) const;
    Kind kind() const { return kind_; }

  private:
    CorrelationKernel(Kind kind, std::function<Complex(const LatticePoint&, const LatticePoint&)> eval);

    Kind kind_;
    std::function<Complex(const LatticePoint&, const LatticePoint&)> eval_;
};

// det(K(p_i, p_j))_{i,j} by pivoted elimination; empty set gives 1. The
// points must be distinct and occupancy-valid; the determinant must be real
// within 1e-9 and values in [-1e-9, 0) are clamped to 0 with a warning on
// std::clog.
double correlation(const CorrelationKernel& kernel, std::span<const LatticePoint> pts);

// E[c_{m1 u m2}] - E[c_{m1}] E[c_{m2}] with m_i = base_i + m; the union is
// deduplicated before the determinant.
double covariance(const CorrelationKernel& kernel, const LatticePoint& base1,
                  const LatticePoint& base2, const Pattern& m);

// |det K - det(g_i K_ij / g_j)|; diagonal conjugation must leave the
// determinant unchanged.
double gauge_check(const CorrelationKernel& kernel, std::span<const LatticePoint> pts,
                   std::span<const double> g);

// Translate every offset of m by base.
std::vector<LatticePoint> translate_pattern(const LatticePoint& base, const Pattern& m);

}  // namespace planeparts

#endif  // PLANEPARTS_KERNELS_HPP
