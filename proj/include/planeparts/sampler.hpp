#ifndef PLANEPARTS_SAMPLER_HPP
#define PLANEPARTS_SAMPLER_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "planeparts/bulkgeom.hpp"
#include "planeparts/qspecial.hpp"

namespace planeparts {

/// Plane partition: ragged array of positive entries, non-increasing along
/// rows and down columns; entries beyond the stored support are zero.
class PlanePartition {
  public:
    PlanePartition() = default;

    // Validates monotonicity; trailing zeros are stripped.
    static PlanePartition from_rows(std::vector<std::vector<int>> rows);

    long long volume() const { return volume_; }
    std::size_t n_rows() const { return rows_.size(); }
    const std::vector<int>& row(std::size_t i) const { return rows_[i]; }
    const std::vector<std::vector<int>>& rows() const { return rows_; }

    // Entry at 1-based (i, j); zero outside the support.
    int entry(std::size_t i, std::size_t j) const;

    // Whether (t, h2/2) belongs to the particle configuration of this
    // partition (the map pi -> {(i-j, pi_ij - (i+j-1)/2)}), including the
    // frozen sea coming from zero entries.
    bool occupied(const LatticePoint& p) const;

    friend auto operator<=>(const PlanePartition&, const PlanePartition&) = default;

  private:
    std::vector<std::vector<int>> rows_;
    long long volume_ = 0;
};

/// Seeded, splittable RNG identity: (seed, stream_index) fully determines
/// every sample drawn from the stream.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_index = 0;
};

/// Triangular array a_{ij} >= 0 supported on i + j - 1 <= N.
class GeometricMatrix {
  public:
    GeometricMatrix() = default;
    explicit GeometricMatrix(int n);  // zero triangle of size n

    int size() const { return n_; }
    int at(int i, int j) const;        // 1-based, zero outside the triangle
    void set(int i, int j, int value); // 1-based, must be inside the triangle
    long long weight() const;          // sum of (i+j-1) a_{ij}

    friend auto operator<=>(const GeometricMatrix&, const GeometricMatrix&) = default;

  private:
    int n_ = 0;
    std::vector<int> entries_;  // row-major triangle
};

// Smallest N with sum_{n>N} n q^n < delta (tail in closed form).
int truncation_order(const QParameter& q, double delta);

// Independent entries with P(a_{ij} >= k) = q^{(i+j-1)k} on the triangle
// i + j - 1 <= truncation_order(q, delta).
GeometricMatrix sample_geometric_matrix(const QParameter& q, double delta, const RngStream& rng);

// Weight-preserving bijection onto plane partitions: |pi| equals the matrix
// weight exactly.
PlanePartition rsk_bijection(const GeometricMatrix& a);

// Exact sample of the geometric-weight measure up to total-variation error
// <= delta from the support truncation.
PlanePartition sample_plane_partition(const QParameter& q, double delta, const RngStream& rng);

/// Occupancies of every occupancy-valid point inside a lattice window
/// (t in [t_min, t_max], h2 in [h2_min, h2_max]).
struct LatticeWindow {
    int t_min = 0;
    int t_max = 0;
    int h2_min = 0;
    int h2_max = 0;

    bool contains(const LatticePoint& p) const;
};

class PointConfiguration {
  public:
    PointConfiguration(const LatticeWindow& window, std::vector<std::uint8_t> occupancy);

    const LatticeWindow& window() const { return window_; }
    // Throws std::out_of_range outside the window or on an invalid point.
    bool occupied(const LatticePoint& p) const;

  private:
    LatticeWindow window_;
    std::vector<std::uint8_t> occupancy_;
};

PointConfiguration to_point_configuration(const PlanePartition& pi, const LatticeWindow& window);

// 1 iff every offset of m translated by base is occupied; m may be empty.
int pattern_indicator(const PointConfiguration& cfg, const LatticePoint& base, const Pattern& m);

// All plane partitions with volume <= max_volume (max 14), exhaustively.
std::vector<PlanePartition> enumerate_plane_partitions(int max_volume);

// counts[n] = number of plane partitions of volume n, n = 0..max_volume,
// from the exhaustive enumeration.
std::vector<long long> plane_partition_counts(int max_volume);

// Same counts from the series expansion of prod (1 - q^n)^{-n}; the two
// generators must agree exactly.
std::vector<long long> plane_partition_counts_series(int max_volume);

// Rigorous bound on M * sum_{n > V} pp(n) q^n via a ratio bound with an
// auxiliary q' in (q, 1).
double pattern_probability_tail_bound(const QParameter& q, int max_volume);

struct PatternProbability {
    double value = 0.0;       // M * sum_{|pi| <= V} q^{|pi|} c_{base+m}(pi)
    double tail_bound = 0.0;  // the true probability lies in [value, value + tail_bound]
};

PatternProbability exact_pattern_probability(const QParameter& q, const Pattern& m,
                                             const LatticePoint& base, int max_volume);

// Text serialization (self-describing, one block per partition).
void write_plane_partition(std::ostream& os, const PlanePartition& pi);
PlanePartition read_plane_partition(std::istream& is);

}  // namespace planeparts

#endif  // PLANEPARTS_SAMPLER_HPP
