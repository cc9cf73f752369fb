#ifndef PLANEPARTS_BULKGEOM_HPP
#define PLANEPARTS_BULKGEOM_HPP

#include <complex>
#include <compare>
#include <vector>

#include "planeparts/qspecial.hpp"

namespace planeparts {

/// Point of the lattice E = Z x (1/2)Z. The height is stored doubled so all
/// coordinates stay integer; h = h2 / 2.
struct LatticePoint {
    int t = 0;
    int h2 = 0;

    friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

// A point can be occupied by some plane partition iff h + (|t|+1)/2 is an
// integer.
bool occupancy_valid(const LatticePoint& p);

// A base point keeps every occupancy-valid offset occupancy-valid under
// translation iff h + t/2 is an integer.
bool translation_admissible(const LatticePoint& p);

/// Finite set of distinct occupancy-valid offsets.
class Pattern {
  public:
    Pattern() = default;
    explicit Pattern(std::vector<LatticePoint> offsets);

    const std::vector<LatticePoint>& offsets() const { return offsets_; }
    std::size_t size() const { return offsets_.size(); }
    bool empty() const { return offsets_.empty(); }

    // max over offsets of max(|t|, |h|); 0 for the empty pattern.
    double sup_norm() const;

  private:
    std::vector<LatticePoint> offsets_;
};

/// Axis-aligned box in macroscopic coordinates (tau, chi).
struct Rect {
    double tau_min = 0.0;
    double tau_max = 0.0;
    double chi_min = 0.0;
    double chi_max = 0.0;
};

// Bulk region A: |2 cosh(tau/2) - e^{-chi}| < 2, strict with margin 1e-12.
bool in_region_A(double tau, double chi);

// Intersection of the circles C(0, e^{-tau/2}) and C(1, e^{-tau/4 - chi/2})
// with positive imaginary part. Throws std::domain_error outside A.
Complex saddle_z(double tau, double chi);

// Local particle density phi / pi where saddle_z = e^{-tau/2 + i phi}.
double density(double tau, double chi);

/// (tau, chi) in A with the saddle point and its angle cached.
struct BulkPoint {
    double tau = 0.0;
    double chi = 0.0;
    Complex z;
    double phi = 0.0;  // in (0, pi)

    static BulkPoint at(double tau, double chi);
};

// |(1 - 1/w)(1 - e^{-tau} w) - e^{-tau/2 - chi}| at w = e^tau saddle_z.
double critical_quadratic_residual(double tau, double chi);

// All translation-admissible (t, h) with (rt, rh) in A intersect K, in
// lexicographic (t, h2) order.
std::vector<LatticePoint> enumerate_translates(const Rect& K, double r, const Pattern& m);

}  // namespace planeparts

#endif  // PLANEPARTS_BULKGEOM_HPP
