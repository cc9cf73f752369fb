#ifndef PLANEPARTS_LLN_HPP
#define PLANEPARTS_LLN_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "planeparts/bulkgeom.hpp"
#include "planeparts/kernels.hpp"
#include "planeparts/sampler.hpp"

namespace planeparts {

/// Continuous compactly supported test function on the (tau, chi) plane.
class TestFunction {
  public:
    enum class Family { cosine_bump, tensor_hat, constant_on_disk_mollified };

    TestFunction(Family family, double tau0, double chi0, double radius, double amplitude);

    double operator()(double tau, double chi) const;

    Family family() const { return family_; }
    double tau0() const { return tau0_; }
    double chi0() const { return chi0_; }
    double radius() const { return radius_; }
    double amplitude() const { return amplitude_; }

    // Bounding box of the support (closed disk/box of the given radius).
    Rect support() const;

    static TestFunction zero();

  private:
    Family family_;
    double tau0_, chi0_, radius_, amplitude_;
};

// r^2 * sum over parity-admissible translates (t, h) of supp(f)/r of
// f(rt, rh) * pattern_indicator(pi, (t, h), m).  The observation window is
// sized automatically from supp(f)/r padded by the pattern's extent.
double empirical_sigma(const PlanePartition& pi, const TestFunction& f, const Pattern& m,
                       double r);

// Deterministic limit: integral over A of f(tau, chi) * E_{(tau,chi)}[c_m],
// midpoint rule at the given step with a Richardson check (halving the step
// must move the result by < 0.5% unless the integral is ~0).  The starting
// step is clamped to a quarter of the support extent so a coarse grid cannot
// miss the support entirely.  Throws std::runtime_error if the check fails
// at the smallest step.
double integral_I(const TestFunction& f, const Pattern& m, double grid_step);

struct LlnRecord {
    double r = 0.0;
    int n_samples = 0;
    double mean_sigma = 0.0;
    double var_sigma = 0.0;      // unbiased sample variance
    double integral = 0.0;       // I(f, m)
    double abs_err = 0.0;        // |mean_sigma - integral|
    double ci_halfwidth = 0.0;   // 95% normal CI on the mean
    double exceed_frac_10 = 0.0; // fraction of replicas with |sigma - I| > 0.10 |I|
    double exceed_frac_05 = 0.0; // fraction with |sigma - I| > 0.05 |I|
};

struct ExperimentReport {
    std::vector<LlnRecord> records;                  // one per r, in input order
    std::vector<std::vector<double>> replica_sigmas; // parallel to records
    double loglog_slope = 0.0;                       // fit of log(abs_err) vs log(r)
    std::uint64_t seed = 0;
    double delta = 0.0;
    double grid_step = 0.0;
};

// For each r in r_list (decreasing): draw n_samples partitions at
// q = exp(-r) with streams (seed, replica index), evaluate empirical_sigma,
// and compare against integral_I.  Replicas are data-parallel over
// n_threads with a fixed-order reduction, so the report is independent of
// the thread count.
ExperimentReport run_lln_experiment(const TestFunction& f, const Pattern& m,
                                    const std::vector<double>& r_list, int n_samples,
                                    std::uint64_t seed, int n_threads = 1,
                                    double delta = 1e-8, double grid_step = 0.02);

// Key-value text with arrays; numbers at 17 significant digits.
void write_report(std::ostream& os, const ExperimentReport& report);

// CSV rows (r, replica, sigma), header included.
void write_replica_csv(std::ostream& os, const ExperimentReport& report);

/// Pair of bulk positions for the covariance-decay scan.
struct BulkPair {
    double tau1 = 0.0, chi1 = 0.0;
    double tau2 = 0.0, chi2 = 0.0;
};

struct CovarianceDecayRow {
    BulkPair pair;
    double r = 0.0;
    double covariance = 0.0; // kernel-based covariance of the two indicators
    double scaled = 0.0;     // |cov|*|chi1-chi2|/r (equal tau), |cov|/r^2 (distinct tau)
    bool equal_tau = false;
};

// Kernel-based covariance of pattern indicators anchored at the two bulk
// positions, for each pair and each r in r_list (q = exp(-r)).  Pairs must
// lie in A and be separated: equal tau requires chi1 != chi2.  Throws
// std::invalid_argument on coincident bases.
std::vector<CovarianceDecayRow> covariance_decay_scan(const std::vector<double>& r_list,
                                                      const Pattern& m,
                                                      const std::vector<BulkPair>& pairs);

struct ConvergenceRow {
    double tau = 0.0, chi = 0.0;
    double r = 0.0;
    LatticePoint base;              // nearest parity-admissible lattice point to (tau,chi)/r
    double rounding_offset = 0.0;   // sup-norm distance from (tau,chi)/r to base, lattice units
    double corr_finite = 0.0;       // correlation via the finite-q kernel
    double corr_bulk = 0.0;         // correlation via the bulk kernel at (tau, chi)
    double err = 0.0;               // |corr_finite - corr_bulk|
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows; // bulk point major, r minor (input order)
    std::vector<double> slopes;       // log-log slope of err vs r, one per bulk point
};

// err(r) = |corr_Kq - corr_sine| at each bulk point for each r in r_list,
// with bases rounded to the admissible lattice.
ConvergenceTable convergence_rate_check(const Pattern& m,
                                        const std::vector<std::pair<double, double>>& bulk_pts,
                                        const std::vector<double>& r_list);

// Nearest parity-admissible lattice point to (tau/r, chi/r); offset_out (if
// non-null) receives the sup-norm rounding distance in lattice units.
LatticePoint round_to_admissible(double tau, double chi, double r, double* offset_out = nullptr);

// Least-squares slope of log(y) vs log(x); requires matching sizes >= 2 and
// positive entries.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace planeparts

#endif  // PLANEPARTS_LLN_HPP
