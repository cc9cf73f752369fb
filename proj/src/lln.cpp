#include "planeparts/lln.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace planeparts {

namespace {

constexpr double kPi = std::numbers::pi;

// Compensated (Kahan) accumulator; summation order is fixed by the callers,
// so results are bit-reproducible.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

void format_g17(std::string& out, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
}

std::string g17(double x) {
    std::string s;
    format_g17(s, x);
    return s;
}

// Region-A membership with the quadrature exclusion margin near the
// boundary, where the saddle point degenerates.
bool in_region_A_margin(double tau, double chi, double margin) {
    const double d = std::abs(2.0 * std::cosh(tau / 2.0) - std::exp(-chi));
    return d < 2.0 - margin;
}

double bulk_correlation_at(double tau, double chi, const Pattern& m) {
    if (m.empty()) return 1.0;
    const CorrelationKernel kernel = CorrelationKernel::bulk(BulkPoint::at(tau, chi));
    return correlation(kernel, m.offsets());
}

}  // namespace

TestFunction::TestFunction(Family family, double tau0, double chi0, double radius,
                           double amplitude)
    : family_(family), tau0_(tau0), chi0_(chi0), radius_(radius), amplitude_(amplitude) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("TestFunction: radius must be positive");
    }
    if (!std::isfinite(tau0) || !std::isfinite(chi0) || !std::isfinite(amplitude)) {
        throw std::invalid_argument("TestFunction: parameters must be finite");
    }
}

double TestFunction::operator()(double tau, double chi) const {
    const double dt = tau - tau0_;
    const double dc = chi - chi0_;
    switch (family_) {
        case Family::cosine_bump: {
            const double d = std::hypot(dt, dc);
            if (d >= radius_) return 0.0;
            const double c = std::cos(kPi * d / (2.0 * radius_));
            return amplitude_ * c * c;
        }
        case Family::tensor_hat: {
            const double u = 1.0 - std::abs(dt) / radius_;
            const double v = 1.0 - std::abs(dc) / radius_;
            return (u > 0.0 && v > 0.0) ? amplitude_ * u * v : 0.0;
        }
        case Family::constant_on_disk_mollified: {
            const double d = std::hypot(dt, dc);
            if (d >= radius_) return 0.0;
            const double half = radius_ / 2.0;
            if (d <= half) return amplitude_;
            const double c = std::cos(kPi * (d - half) / (2.0 * half));
            return amplitude_ * c * c;
        }
    }
    return 0.0;
}

Rect TestFunction::support() const {
    return Rect{tau0_ - radius_, tau0_ + radius_, chi0_ - radius_, chi0_ + radius_};
}

TestFunction TestFunction::zero() {
    return TestFunction(Family::cosine_bump, 0.0, 0.0, 1.0, 0.0);
}

double empirical_sigma(const PlanePartition& pi, const TestFunction& f, const Pattern& m,
                       double r) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("empirical_sigma: r must be positive");
    }
    const std::vector<LatticePoint> bases = enumerate_translates(f.support(), r, m);
    if (bases.empty()) return 0.0;

    int t_lo = bases.front().t, t_hi = bases.front().t;
    int h_lo = bases.front().h2, h_hi = bases.front().h2;
    for (const LatticePoint& b : bases) {
        t_lo = std::min(t_lo, b.t);
        t_hi = std::max(t_hi, b.t);
        h_lo = std::min(h_lo, b.h2);
        h_hi = std::max(h_hi, b.h2);
    }
    int mt_lo = 0, mt_hi = 0, mh_lo = 0, mh_hi = 0;
    for (const LatticePoint& o : m.offsets()) {
        mt_lo = std::min(mt_lo, o.t);
        mt_hi = std::max(mt_hi, o.t);
        mh_lo = std::min(mh_lo, o.h2);
        mh_hi = std::max(mh_hi, o.h2);
    }
    const LatticeWindow window{t_lo + mt_lo, t_hi + mt_hi, h_lo + mh_lo, h_hi + mh_hi};
    const PointConfiguration cfg = to_point_configuration(pi, window);

    Kahan acc;  // bases come lexicographically ordered from enumerate_translates
    for (const LatticePoint& b : bases) {
        const double value = f(r * b.t, r * b.h2 / 2.0);
        if (value == 0.0) continue;
        if (pattern_indicator(cfg, b, m)) acc.add(value);
    }
    return r * r * acc.sum;
}

namespace {

// Midpoint rule for f * corr over (A with margin) intersect supp f at a
// fixed cell size; lexicographic cell order with compensated summation.
double integral_level(const TestFunction& f, const Pattern& m, double step) {
    const Rect box = f.support();
    const int nx = static_cast<int>(std::ceil((box.tau_max - box.tau_min) / step - 1e-12));
    const int ny = static_cast<int>(std::ceil((box.chi_max - box.chi_min) / step - 1e-12));
    Kahan acc;
    for (int i = 0; i < nx; ++i) {
        const double tau = box.tau_min + (i + 0.5) * step;
        for (int j = 0; j < ny; ++j) {
            const double chi = box.chi_min + (j + 0.5) * step;
            const double value = f(tau, chi);
            if (value == 0.0) continue;
            if (!in_region_A_margin(tau, chi, 1e-9)) continue;
            acc.add(value * bulk_correlation_at(tau, chi, m));
        }
    }
    return acc.sum * step * step;
}

}  // namespace

double integral_I(const TestFunction& f, const Pattern& m, double grid_step) {
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
        throw std::invalid_argument("integral_I: grid_step must be positive");
    }
    // A grid coarser than a quarter of the support can miss it entirely and
    // make two successive zero levels agree spuriously; clamp the start.
    const Rect box = f.support();
    const double start = std::min({grid_step, (box.tau_max - box.tau_min) / 4.0,
                                   (box.chi_max - box.chi_min) / 4.0});
    double prev = integral_level(f, m, start);
    double step = start;
    for (int level = 0; level < 4; ++level) {
        step /= 2.0;
        const double cur = integral_level(f, m, step);
        if (std::abs(cur - prev) <= 0.005 * std::abs(cur) + 1e-12) return cur;
        prev = cur;
    }
    throw std::runtime_error("integral_I: Richardson check failed at the minimum grid step");
}

ExperimentReport run_lln_experiment(const TestFunction& f, const Pattern& m,
                                    const std::vector<double>& r_list, int n_samples,
                                    std::uint64_t seed, int n_threads, double delta,
                                    double grid_step) {
    if (r_list.empty()) {
        throw std::invalid_argument("run_lln_experiment: r_list must be nonempty");
    }
    for (std::size_t i = 0; i < r_list.size(); ++i) {
        if (!(r_list[i] > 0.0)) {
            throw std::invalid_argument("run_lln_experiment: r values must be positive");
        }
        if (i > 0 && !(r_list[i] < r_list[i - 1])) {
            throw std::invalid_argument("run_lln_experiment: r_list must be decreasing");
        }
    }
    if (n_samples < 50) {
        throw std::invalid_argument("run_lln_experiment: n_samples must be at least 50");
    }
    if (n_threads < 1) {
        throw std::invalid_argument("run_lln_experiment: n_threads must be positive");
    }

    ExperimentReport report;
    report.seed = seed;
    report.delta = delta;
    report.grid_step = grid_step;
    const double integral = integral_I(f, m, grid_step);

    for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
        const double r = r_list[ri];
        const QParameter q = QParameter::from_r(r);
        std::vector<double> sigmas(static_cast<std::size_t>(n_samples), 0.0);

        // Streams are indexed by (r index, replica), so the values do not
        // depend on how replicas are partitioned across threads.
        auto worker = [&](int begin, int end) {
            for (int k = begin; k < end; ++k) {
                const RngStream stream{
                    seed, ri * static_cast<std::uint64_t>(n_samples) + static_cast<std::uint64_t>(k)};
                const PlanePartition pi = sample_plane_partition(q, delta, stream);
                sigmas[static_cast<std::size_t>(k)] = empirical_sigma(pi, f, m, r);
            }
        };
        if (n_threads == 1) {
            worker(0, n_samples);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(n_threads));
            for (int b = 0; b < n_threads; ++b) {
                const int begin = static_cast<int>(static_cast<long long>(n_samples) * b / n_threads);
                const int end =
                    static_cast<int>(static_cast<long long>(n_samples) * (b + 1) / n_threads);
                pool.emplace_back(worker, begin, end);
            }
            for (std::thread& th : pool) th.join();
        }

        Kahan mean_acc;
        for (double s : sigmas) mean_acc.add(s);
        const double mean = mean_acc.sum / n_samples;
        Kahan var_acc;
        for (double s : sigmas) var_acc.add((s - mean) * (s - mean));
        const double var = var_acc.sum / (n_samples - 1);

        int over10 = 0, over05 = 0;
        for (double s : sigmas) {
            const double dev = std::abs(s - integral);
            if (dev > 0.10 * std::abs(integral)) ++over10;
            if (dev > 0.05 * std::abs(integral)) ++over05;
        }

        LlnRecord rec;
        rec.r = r;
        rec.n_samples = n_samples;
        rec.mean_sigma = mean;
        rec.var_sigma = var;
        rec.integral = integral;
        rec.abs_err = std::abs(mean - integral);
        rec.ci_halfwidth = 1.959963984540054 * std::sqrt(var / n_samples);
        rec.exceed_frac_10 = static_cast<double>(over10) / n_samples;
        rec.exceed_frac_05 = static_cast<double>(over05) / n_samples;
        report.records.push_back(rec);
        report.replica_sigmas.push_back(std::move(sigmas));
    }

    std::vector<double> xs, ys;
    for (const LlnRecord& rec : report.records) {
        if (rec.abs_err > 0.0) {
            xs.push_back(rec.r);
            ys.push_back(rec.abs_err);
        }
    }
    report.loglog_slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
    return report;
}

void write_report(std::ostream& os, const ExperimentReport& report) {
    std::string out;
    out += "planeparts.lln.report.version = 1\n";
    out += "seed = " + std::to_string(report.seed) + "\n";
    out += "delta = " + g17(report.delta) + "\n";
    out += "grid_step = " + g17(report.grid_step) + "\n";
    out += "loglog_slope = " + g17(report.loglog_slope) + "\n";
    out += "n_records = " + std::to_string(report.records.size()) + "\n";
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        const LlnRecord& rec = report.records[i];
        const std::string p = "record." + std::to_string(i) + ".";
        out += p + "r = " + g17(rec.r) + "\n";
        out += p + "n_samples = " + std::to_string(rec.n_samples) + "\n";
        out += p + "mean_sigma = " + g17(rec.mean_sigma) + "\n";
        out += p + "var_sigma = " + g17(rec.var_sigma) + "\n";
        out += p + "integral = " + g17(rec.integral) + "\n";
        out += p + "abs_err = " + g17(rec.abs_err) + "\n";
        out += p + "ci_halfwidth = " + g17(rec.ci_halfwidth) + "\n";
        out += p + "exceed_frac_10 = " + g17(rec.exceed_frac_10) + "\n";
        out += p + "exceed_frac_05 = " + g17(rec.exceed_frac_05) + "\n";
    }
    os << out;
}

void write_replica_csv(std::ostream& os, const ExperimentReport& report) {
    std::string out = "r,replica,sigma\n";
    for (std::size_t i = 0; i < report.replica_sigmas.size(); ++i) {
        const double r = report.records[i].r;
        const std::vector<double>& sigmas = report.replica_sigmas[i];
        for (std::size_t k = 0; k < sigmas.size(); ++k) {
            out += g17(r) + "," + std::to_string(k) + "," + g17(sigmas[k]) + "\n";
        }
    }
    os << out;
}

std::vector<CovarianceDecayRow> covariance_decay_scan(const std::vector<double>& r_list,
                                                      const Pattern& m,
                                                      const std::vector<BulkPair>& pairs) {
    if (r_list.empty()) {
        throw std::invalid_argument("covariance_decay_scan: r_list must be nonempty");
    }
    for (double r : r_list) {
        if (!(r > 0.0)) {
            throw std::invalid_argument("covariance_decay_scan: r values must be positive");
        }
    }
    for (const BulkPair& pair : pairs) {
        if (!in_region_A(pair.tau1, pair.chi1) || !in_region_A(pair.tau2, pair.chi2)) {
            throw std::invalid_argument("covariance_decay_scan: pair outside region A");
        }
        if (pair.tau1 == pair.tau2 && pair.chi1 == pair.chi2) {
            throw std::invalid_argument(
                "covariance_decay_scan: coincident bases violate the separation condition");
        }
    }

    std::vector<CovarianceDecayRow> rows;
    rows.reserve(pairs.size() * r_list.size());
    for (const BulkPair& pair : pairs) {
        const bool equal_tau = pair.tau1 == pair.tau2;
        for (double r : r_list) {
            const LatticePoint base1 = round_to_admissible(pair.tau1, pair.chi1, r);
            const LatticePoint base2 = round_to_admissible(pair.tau2, pair.chi2, r);
            if (base1 == base2) {
                throw std::invalid_argument(
                    "covariance_decay_scan: bases coincide after rounding; r too coarse");
            }
            const CorrelationKernel kernel = CorrelationKernel::finite_q(QParameter::from_r(r));
            CovarianceDecayRow row;
            row.pair = pair;
            row.r = r;
            row.equal_tau = equal_tau;
            row.covariance = covariance(kernel, base1, base2, m);
            row.scaled = equal_tau
                             ? std::abs(row.covariance) * std::abs(pair.chi1 - pair.chi2) / r
                             : std::abs(row.covariance) / (r * r);
            rows.push_back(row);
        }
    }
    return rows;
}

ConvergenceTable convergence_rate_check(const Pattern& m,
                                        const std::vector<std::pair<double, double>>& bulk_pts,
                                        const std::vector<double>& r_list) {
    if (r_list.empty()) {
        throw std::invalid_argument("convergence_rate_check: r_list must be nonempty");
    }
    ConvergenceTable table;
    for (const auto& [tau, chi] : bulk_pts) {
        if (!in_region_A(tau, chi)) {
            throw std::invalid_argument("convergence_rate_check: point outside region A");
        }
        const double corr_bulk = bulk_correlation_at(tau, chi, m);
        std::vector<double> xs, ys;
        for (double r : r_list) {
            ConvergenceRow row;
            row.tau = tau;
            row.chi = chi;
            row.r = r;
            row.base = round_to_admissible(tau, chi, r, &row.rounding_offset);
            const CorrelationKernel kernel = CorrelationKernel::finite_q(QParameter::from_r(r));
            const std::vector<LatticePoint> pts = translate_pattern(row.base, m);
            row.corr_finite = correlation(kernel, pts);
            row.corr_bulk = corr_bulk;
            row.err = std::abs(row.corr_finite - row.corr_bulk);
            if (row.err > 0.0) {
                xs.push_back(r);
                ys.push_back(row.err);
            }
            table.rows.push_back(row);
        }
        table.slopes.push_back(xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0);
    }
    return table;
}

LatticePoint round_to_admissible(double tau, double chi, double r, double* offset_out) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::invalid_argument("round_to_admissible: r must be positive");
    }
    const double ts = tau / r;
    const double hs = chi / r;  // target height in h units (h = h2 / 2)

    LatticePoint best{0, 0};
    double best_off = std::numeric_limits<double>::infinity();
    const int t0 = static_cast<int>(std::floor(ts));
    const int h0 = static_cast<int>(std::floor(2.0 * hs));
    for (int t = t0; t <= t0 + 1; ++t) {
        for (int h2 = h0 - 1; h2 <= h0 + 2; ++h2) {
            if (!translation_admissible({t, h2})) continue;
            const double off = std::max(std::abs(t - ts), std::abs(h2 / 2.0 - hs));
            const bool better =
                off < best_off - 1e-15 ||
                (off < best_off + 1e-15 && LatticePoint{t, h2} < best);
            if (better) {
                best = LatticePoint{t, h2};
                best_off = off;
            }
        }
    }
    if (offset_out != nullptr) *offset_out = best_off;
    return best;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("loglog_slope: need matching sizes >= 2");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw std::invalid_argument("loglog_slope: entries must be positive");
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        throw std::invalid_argument("loglog_slope: degenerate abscissae");
    }
    return (n * sxy - sx * sy) / denom;
}

}  // namespace planeparts
