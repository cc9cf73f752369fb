#include "planeparts/bulkgeom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace planeparts {

namespace {

constexpr double kBoundaryMargin = 1e-12;

int floor_mod2(int a) { return ((a % 2) + 2) % 2; }

}  // namespace

bool occupancy_valid(const LatticePoint& p) {
    // h + (|t|+1)/2 integer <=> h2 + |t| + 1 even <=> h2 + t odd.
    return floor_mod2(p.h2 + p.t) == 1;
}

bool translation_admissible(const LatticePoint& p) {
    // h + t/2 integer <=> h2 + t even.
    return floor_mod2(p.h2 + p.t) == 0;
}

Pattern::Pattern(std::vector<LatticePoint> offsets) : offsets_(std::move(offsets)) {
    for (const LatticePoint& p : offsets_) {
        if (!occupancy_valid(p)) {
            throw std::invalid_argument("Pattern: offset is not occupancy-valid");
        }
    }
    std::vector<LatticePoint> sorted = offsets_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("Pattern: offsets must be distinct");
    }
}

double Pattern::sup_norm() const {
    double m = 0.0;
    for (const LatticePoint& p : offsets_) {
        m = std::max({m, static_cast<double>(std::abs(p.t)), std::abs(p.h2) / 2.0});
    }
    return m;
}

bool in_region_A(double tau, double chi) {
    return std::abs(2.0 * std::cosh(tau / 2.0) - std::exp(-chi)) < 2.0 - kBoundaryMargin;
}

Complex saddle_z(double tau, double chi) {
    if (!in_region_A(tau, chi)) {
        throw std::domain_error("saddle_z: (tau, chi) outside region A");
    }
    const double rho = std::exp(-tau / 2.0);          // |z|
    const double d = std::exp(-tau / 4.0 - chi / 2.0);  // |z - 1|
    const double re = (1.0 + rho * rho - d * d) / 2.0;
    const double im2 = rho * rho - re * re;
    if (!(im2 > 0.0)) {
        throw std::domain_error("saddle_z: circles do not intersect transversally");
    }
    return {re, std::sqrt(im2)};
}

double density(double tau, double chi) {
    const Complex z = saddle_z(tau, chi);
    return std::atan2(z.imag(), z.real()) / std::numbers::pi;
}

BulkPoint BulkPoint::at(double tau, double chi) {
    BulkPoint bp;
    bp.tau = tau;
    bp.chi = chi;
    bp.z = saddle_z(tau, chi);
    bp.phi = std::atan2(bp.z.imag(), bp.z.real());
    return bp;
}

double critical_quadratic_residual(double tau, double chi) {
    const Complex w = std::exp(tau) * saddle_z(tau, chi);
    const Complex lhs = (1.0 - 1.0 / w) * (1.0 - std::exp(-tau) * w);
    return std::abs(lhs - std::exp(-tau / 2.0 - chi));
}

std::vector<LatticePoint> enumerate_translates(const Rect& K, double r, const Pattern&) {
    if (!(r > 0.0)) throw std::invalid_argument("enumerate_translates: r must be positive");
    std::vector<LatticePoint> out;
    const int t_lo = static_cast<int>(std::floor(K.tau_min / r)) - 1;
    const int t_hi = static_cast<int>(std::ceil(K.tau_max / r)) + 1;
    const int h_lo = static_cast<int>(std::floor(2.0 * K.chi_min / r)) - 1;
    const int h_hi = static_cast<int>(std::ceil(2.0 * K.chi_max / r)) + 1;
    for (int t = t_lo; t <= t_hi; ++t) {
        const double tau = r * t;
        if (tau < K.tau_min || tau > K.tau_max) continue;
        for (int h2 = h_lo; h2 <= h_hi; ++h2) {
            if (floor_mod2(h2 + t) != 0) continue;
            const double chi = r * h2 / 2.0;
            if (chi < K.chi_min || chi > K.chi_max) continue;
            if (!in_region_A(tau, chi)) continue;
            out.push_back({t, h2});
        }
    }
    return out;
}

}  // namespace planeparts
