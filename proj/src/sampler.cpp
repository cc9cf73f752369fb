#include "planeparts/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace planeparts {

namespace {

std::mt19937_64 make_engine(const RngStream& rng) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(rng.seed),
        static_cast<std::uint32_t>(rng.seed >> 32),
        static_cast<std::uint32_t>(rng.stream_index),
        static_cast<std::uint32_t>(rng.stream_index >> 32),
    };
    return std::mt19937_64(seq);
}

// Uniform in (0, 1], built from the top 53 bits so the value stream does not
// depend on the standard library's distribution internals.
double uniform01(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

// Conjugate of a weakly decreasing positive sequence: out[k] = #{v > k}.
std::vector<int> conjugate(const std::vector<int>& row) {
    std::vector<int> out;
    if (row.empty()) return out;
    out.resize(row[0], 0);
    for (int v : row) {
        for (int k = 0; k < v; ++k) out[k] += 1;
    }
    return out;
}

}  // namespace

PlanePartition PlanePartition::from_rows(std::vector<std::vector<int>> rows) {
    for (auto& row : rows) {
        while (!row.empty() && row.back() == 0) row.pop_back();
    }
    while (!rows.empty() && rows.back().empty()) rows.pop_back();

    PlanePartition pi;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.empty()) {
            throw std::invalid_argument("PlanePartition: interior row is empty");
        }
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] <= 0) throw std::invalid_argument("PlanePartition: entries must be positive");
            if (j + 1 < row.size() && row[j + 1] > row[j]) {
                throw std::invalid_argument("PlanePartition: row must be non-increasing");
            }
            if (i > 0) {
                const auto& above = rows[i - 1];
                if (j >= above.size() || row[j] > above[j]) {
                    throw std::invalid_argument("PlanePartition: column must be non-increasing");
                }
            }
            pi.volume_ += row[j];
        }
    }
    pi.rows_ = std::move(rows);
    return pi;
}

int PlanePartition::entry(std::size_t i, std::size_t j) const {
    if (i == 0 || j == 0) throw std::out_of_range("PlanePartition::entry: indices are 1-based");
    if (i > rows_.size() || j > rows_[i - 1].size()) return 0;
    return rows_[i - 1][j - 1];
}

bool PlanePartition::occupied(const LatticePoint& p) const {
    if (!occupancy_valid(p)) return false;
    // Walk the diagonal i - j = t; cell k has i + j - 1 = 2k + |t| - 1 and
    // contributes the point h2 = 2 pi_{ij} - (2k + |t| - 1), strictly
    // decreasing in k.
    const int at = std::abs(p.t);
    for (int k = 1;; ++k) {
        const std::size_t i = (p.t >= 0) ? k + p.t : k;
        const std::size_t j = (p.t >= 0) ? k : k - p.t;
        const int c = (i <= rows_.size() && j <= rows_[i - 1].size()) ? rows_[i - 1][j - 1] : 0;
        const int h2 = 2 * c - (2 * k + at - 1);
        if (h2 == p.h2) return true;
        if (c == 0 && h2 < p.h2) return false;  // sea level passed the query
    }
}

GeometricMatrix::GeometricMatrix(int n) : n_(n) {
    if (n < 0) throw std::invalid_argument("GeometricMatrix: size must be nonnegative");
    entries_.assign(static_cast<std::size_t>(n) * (n + 1) / 2, 0);
}

int GeometricMatrix::at(int i, int j) const {
    if (i < 1 || j < 1) throw std::out_of_range("GeometricMatrix::at: indices are 1-based");
    if (i + j - 1 > n_) return 0;
    const std::size_t row_off = static_cast<std::size_t>(i - 1) * n_ -
                                static_cast<std::size_t>(i - 1) * (i - 2) / 2;
    return entries_[row_off + (j - 1)];
}

void GeometricMatrix::set(int i, int j, int value) {
    if (i < 1 || j < 1 || i + j - 1 > n_) {
        throw std::out_of_range("GeometricMatrix::set: cell outside the triangle");
    }
    if (value < 0) throw std::invalid_argument("GeometricMatrix::set: entries are nonnegative");
    const std::size_t row_off = static_cast<std::size_t>(i - 1) * n_ -
                                static_cast<std::size_t>(i - 1) * (i - 2) / 2;
    entries_[row_off + (j - 1)] = value;
}

long long GeometricMatrix::weight() const {
    long long w = 0;
    for (int i = 1; i <= n_; ++i) {
        for (int j = 1; i + j - 1 <= n_; ++j) w += static_cast<long long>(i + j - 1) * at(i, j);
    }
    return w;
}

int truncation_order(const QParameter& q, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("truncation_order: delta must lie in (0,1)");
    }
    // Tail sum_{n>N} n q^n = q^{N+1}((N+1) - Nq) / (1-q)^2 in closed form.
    const double om = 1.0 - q.q;
    for (int n = 0;; ++n) {
        const double tail = std::pow(q.q, n + 1) * ((n + 1) - n * q.q) / (om * om);
        if (tail < delta) return n;
    }
}

GeometricMatrix sample_geometric_matrix(const QParameter& q, double delta, const RngStream& rng) {
    const int n = truncation_order(q, delta);
    GeometricMatrix a(n);
    std::mt19937_64 gen = make_engine(rng);
    const double logq = std::log(q.q);
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; i + j - 1 <= n; ++j) {
            const double u = uniform01(gen);
            // P(a >= k) = q^{(i+j-1)k}.
            const int k = static_cast<int>(std::floor(std::log(u) / ((i + j - 1) * logq)));
            a.set(i, j, k);
        }
    }
    return a;
}

PlanePartition rsk_bijection(const GeometricMatrix& a) {
    // Mirrored row insertion over the biword taken in decreasing cell order:
    // sigma collects the j's, rho records the i's, both with weakly
    // decreasing rows and strictly decreasing columns.
    std::vector<std::vector<int>> sigma, rho;
    const int n = a.size();
    for (int i = n; i >= 1; --i) {
        for (int j = n - i + 1; j >= 1; --j) {
            for (int rep = 0; rep < a.at(i, j); ++rep) {
                int x = j;
                for (std::size_t row = 0;; ++row) {
                    if (row == sigma.size()) {
                        sigma.push_back({x});
                        rho.push_back({i});
                        break;
                    }
                    auto& s = sigma[row];
                    auto it = std::find_if(s.begin(), s.end(), [x](int v) { return v < x; });
                    if (it == s.end()) {
                        s.push_back(x);
                        rho[row].push_back(i);
                        break;
                    }
                    std::swap(x, *it);
                }
            }
        }
    }

    // Merge along the main diagonal: row a of the output right of the
    // diagonal is the conjugate of sigma's row a, column a below the
    // diagonal is the conjugate of rho's row a (their first parts agree).
    std::vector<std::vector<int>> rows;
    auto cell = [&rows](std::size_t i, std::size_t j) -> int& {
        if (rows.size() < i) rows.resize(i);
        if (rows[i - 1].size() < j) rows[i - 1].resize(j, 0);
        return rows[i - 1][j - 1];
    };
    for (std::size_t a_row = 1; a_row <= sigma.size(); ++a_row) {
        const std::vector<int> right = conjugate(sigma[a_row - 1]);
        for (std::size_t k = 0; k < right.size(); ++k) cell(a_row, a_row + k) = right[k];
        const std::vector<int> down = conjugate(rho[a_row - 1]);
        for (std::size_t k = 1; k < down.size(); ++k) cell(a_row + k, a_row) = down[k];
    }
    return PlanePartition::from_rows(std::move(rows));
}

PlanePartition sample_plane_partition(const QParameter& q, double delta, const RngStream& rng) {
    return rsk_bijection(sample_geometric_matrix(q, delta, rng));
}

bool LatticeWindow::contains(const LatticePoint& p) const {
    return p.t >= t_min && p.t <= t_max && p.h2 >= h2_min && p.h2 <= h2_max;
}

PointConfiguration::PointConfiguration(const LatticeWindow& window,
                                       std::vector<std::uint8_t> occupancy)
    : window_(window), occupancy_(std::move(occupancy)) {
    const std::size_t want = static_cast<std::size_t>(window.t_max - window.t_min + 1) *
                             static_cast<std::size_t>(window.h2_max - window.h2_min + 1);
    if (window.t_max < window.t_min || window.h2_max < window.h2_min ||
        occupancy_.size() != want) {
        throw std::invalid_argument("PointConfiguration: occupancy does not match window");
    }
}

bool PointConfiguration::occupied(const LatticePoint& p) const {
    if (!window_.contains(p)) {
        throw std::out_of_range("PointConfiguration: point outside the window");
    }
    if (!occupancy_valid(p)) {
        throw std::out_of_range("PointConfiguration: point is not occupancy-valid");
    }
    const std::size_t idx = static_cast<std::size_t>(p.t - window_.t_min) *
                                static_cast<std::size_t>(window_.h2_max - window_.h2_min + 1) +
                            static_cast<std::size_t>(p.h2 - window_.h2_min);
    return occupancy_[idx] != 0;
}

PointConfiguration to_point_configuration(const PlanePartition& pi, const LatticeWindow& window) {
    if (window.t_max < window.t_min || window.h2_max < window.h2_min) {
        throw std::invalid_argument("to_point_configuration: empty window");
    }
    const std::size_t h_span = static_cast<std::size_t>(window.h2_max - window.h2_min + 1);
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(window.t_max - window.t_min + 1) *
                                      h_span,
                                  0);
    for (int t = window.t_min; t <= window.t_max; ++t) {
        const int at = std::abs(t);
        for (int k = 1;; ++k) {
            const std::size_t i = (t >= 0) ? k + t : k;
            const std::size_t j = (t >= 0) ? k : k - t;
            const int c = pi.entry(i, j);
            const int h2 = 2 * c - (2 * k + at - 1);
            if (c == 0 && h2 < window.h2_min) break;
            if (h2 >= window.h2_min && h2 <= window.h2_max) {
                occ[static_cast<std::size_t>(t - window.t_min) * h_span +
                    static_cast<std::size_t>(h2 - window.h2_min)] = 1;
            }
        }
    }
    return PointConfiguration(window, std::move(occ));
}

int pattern_indicator(const PointConfiguration& cfg, const LatticePoint& base, const Pattern& m) {
    if (!translation_admissible(base)) {
        throw std::invalid_argument("pattern_indicator: base is not translation-admissible");
    }
    for (const LatticePoint& off : m.offsets()) {
        if (!cfg.occupied({base.t + off.t, base.h2 + off.h2})) return 0;
    }
    return 1;
}

namespace {

// Depth-first: extend the current row cell by cell; every completed prefix
// is a legal row, after which deeper rows are explored.
void extend_row(std::vector<std::vector<int>>& rows, std::vector<int>& row, int cap, int budget,
                std::vector<PlanePartition>& out);

void start_row(std::vector<std::vector<int>>& rows, int budget,
               std::vector<PlanePartition>& out) {
    const int cap = rows.empty() ? budget : rows.back()[0];
    if (budget < 1 || cap < 1) return;
    std::vector<int> row;
    extend_row(rows, row, cap, budget, out);
}

void extend_row(std::vector<std::vector<int>>& rows, std::vector<int>& row, int cap, int budget,
                std::vector<PlanePartition>& out) {
    const std::size_t j = row.size();
    int col_cap = rows.empty() ? budget : (j < rows.back().size() ? rows.back()[j] : 0);
    int row_cap = row.empty() ? cap : row.back();
    const int hi = std::min({col_cap, row_cap, budget});
    for (int v = 1; v <= hi; ++v) {
        row.push_back(v);
        rows.push_back(row);
        out.push_back(PlanePartition::from_rows(rows));
        start_row(rows, budget - v, out);  // deeper rows under this completed prefix
        rows.pop_back();
        extend_row(rows, row, cap, budget - v, out);  // longer prefixes of this row
        row.pop_back();
        // Longer rows with a larger v here are visited by the loop itself.
    }
}

}  // namespace

std::vector<PlanePartition> enumerate_plane_partitions(int max_volume) {
    if (max_volume < 0 || max_volume > 14) {
        throw std::invalid_argument("enumerate_plane_partitions: max_volume must be in [0, 14]");
    }
    std::vector<PlanePartition> out;
    out.push_back(PlanePartition{});
    std::vector<std::vector<int>> rows;
    start_row(rows, max_volume, out);
    return out;
}

std::vector<long long> plane_partition_counts(int max_volume) {
    std::vector<long long> counts(max_volume + 1, 0);
    for (const PlanePartition& pi : enumerate_plane_partitions(max_volume)) {
        counts[pi.volume()] += 1;
    }
    return counts;
}

std::vector<long long> plane_partition_counts_series(int max_volume) {
    // Coefficients of prod_{n>=1} (1 - q^n)^{-n}: apply 1/(1-q^n) n times.
    std::vector<long long> c(max_volume + 1, 0);
    c[0] = 1;
    for (int n = 1; n <= max_volume; ++n) {
        for (int rep = 0; rep < n; ++rep) {
            for (int v = n; v <= max_volume; ++v) c[v] += c[v - n];
        }
    }
    return c;
}

double pattern_probability_tail_bound(const QParameter& q, int max_volume) {
    // pp(n) <= 1 / (M(q') q'^n) for any q' in (q, 1), so
    // M(q) sum_{n>V} pp(n) q^n <= (M(q)/M(q')) x^{V+1}/(1-x), x = q/q'.
    const double mq = macmahon_constant(q);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 19; ++k) {
        const double qp = q.q + k * (1.0 - q.q) / 20.0;
        if (!(qp < 1.0)) continue;
        const double x = q.q / qp;
        const double bound = mq / macmahon_constant(QParameter::from_q(qp)) *
                             std::pow(x, max_volume + 1) / (1.0 - x);
        best = std::min(best, bound);
    }
    return best;
}

PatternProbability exact_pattern_probability(const QParameter& q, const Pattern& m,
                                             const LatticePoint& base, int max_volume) {
    if (!translation_admissible(base)) {
        throw std::invalid_argument("exact_pattern_probability: base is not translation-admissible");
    }
    // Window just covering base + m (a 1x1 window at the origin if m is empty).
    LatticeWindow w{base.t, base.t, base.h2, base.h2};
    for (const LatticePoint& off : m.offsets()) {
        w.t_min = std::min(w.t_min, base.t + off.t);
        w.t_max = std::max(w.t_max, base.t + off.t);
        w.h2_min = std::min(w.h2_min, base.h2 + off.h2);
        w.h2_max = std::max(w.h2_max, base.h2 + off.h2);
    }

    double series = 0.0;
    for (const PlanePartition& pi : enumerate_plane_partitions(max_volume)) {
        const PointConfiguration cfg = to_point_configuration(pi, w);
        if (pattern_indicator(cfg, base, m)) {
            series += std::pow(q.q, static_cast<double>(pi.volume()));
        }
    }
    PatternProbability out;
    out.value = macmahon_constant(q) * series;
    out.tail_bound = pattern_probability_tail_bound(q, max_volume);
    return out;
}

void write_plane_partition(std::ostream& os, const PlanePartition& pi) {
    os << "planepartition rows=" << pi.n_rows() << " volume=" << pi.volume() << "\n";
    for (std::size_t i = 0; i < pi.n_rows(); ++i) {
        const auto& row = pi.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ' ';
            os << row[j];
        }
        os << "\n";
    }
}

PlanePartition read_plane_partition(std::istream& is) {
    std::string header;
    while (std::getline(is, header) && (header.empty() || header[0] == '#')) {
    }
    std::size_t n_rows = 0;
    long long volume = -1;
    if (std::sscanf(header.c_str(), "planepartition rows=%zu volume=%lld", &n_rows, &volume) != 2) {
        throw std::runtime_error("read_plane_partition: malformed header");
    }
    std::vector<std::vector<int>> rows(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::string line;
        if (!std::getline(is, line)) {
            throw std::runtime_error("read_plane_partition: truncated input");
        }
        std::istringstream ls(line);
        int v;
        while (ls >> v) rows[i].push_back(v);
    }
    PlanePartition pi = PlanePartition::from_rows(std::move(rows));
    if (pi.volume() != volume) {
        throw std::runtime_error("read_plane_partition: volume mismatch");
    }
    return pi;
}

}  // namespace planeparts
