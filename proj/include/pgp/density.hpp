#ifndef PGP_DENSITY_HPP
#define PGP_DENSITY_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace pgp {

using PointId = std::int64_t;

/// Distances below this are clamped before being inverted.
inline constexpr double kMinPointDistance = 1e-6;

struct Neighbor {
  PointId id = 0;
  double distance = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// 2D points keyed by id with a uniform-grid bucket index.
///
/// The bucket size follows the median nearest-neighbour distance at build
/// time. The index is rebuilt after enough removals that the sizing is stale.
class PointSet {
 public:
  PointSet() = default;
  /// Points get ids 0..n-1 in order.
  explicit PointSet(std::span<const Eigen::Vector2d> points);
  explicit PointSet(const std::map<PointId, Eigen::Vector2d>& points);

  void insert(PointId id, const Eigen::Vector2d& p);
  void erase(PointId id);

  bool contains(PointId id) const { return points_.contains(id); }
  std::size_t size() const { return points_.size(); }
  const Eigen::Vector2d& position(PointId id) const;
  std::vector<PointId> ids() const;
  double cell_size() const { return cell_; }

  /// The k nearest other points of `id`, ascending by distance, ties by lower id.
  std::vector<Neighbor> knn(PointId id, std::size_t k) const;
  /// The k nearest points to an arbitrary location (no exclusion).
  std::vector<Neighbor> knn(const Eigen::Vector2d& q, std::size_t k) const;
  /// Other points strictly closer than r to `id`, ascending.
  std::vector<Neighbor> within(PointId id, double r) const;

 private:
  using CellKey = std::pair<std::int64_t, std::int64_t>;
  struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept {
      return std::hash<std::int64_t>{}(k.first * 73856093LL ^ k.second * 19349663LL);
    }
  };

  CellKey cell_of(const Eigen::Vector2d& p) const;
  void rebuild();
  void bucket(PointId id, const Eigen::Vector2d& p);
  std::vector<Neighbor> search(const Eigen::Vector2d& q, std::size_t k, const PointId* exclude) const;

  std::map<PointId, Eigen::Vector2d> points_;
  std::unordered_map<CellKey, std::vector<PointId>, CellHash> cells_;
  double cell_ = 1.0;
  std::int64_t min_cx_ = 0, max_cx_ = -1, min_cy_ = 0, max_cy_ = -1;
  std::size_t built_size_ = 0;
};

/// A density value plus the number of neighbour distances that had to be
/// clamped to kMinPointDistance (zero on data with unique positions).
struct Density {
  double value = 0.0;
  std::size_t clamped = 0;
};

/// Neighbours strictly inside radius r, divided by the disc area. Throws
/// std::invalid_argument for r <= 0.
double r_density(const PointSet& ps, PointId id, double r);

/// Scale-invariant density: (1/pi) * sum of inverse distances to all other points.
Density sid_exact(const PointSet& ps, PointId id);

/// Scale-invariant density restricted to the `max_neighbors` nearest points.
Density sid_truncated(const PointSet& ps, PointId id, std::size_t max_neighbors);

std::vector<Neighbor> knn(const PointSet& ps, PointId id, std::size_t k);

/// Truncated scale-invariant densities of every point, kept current under
/// removals by recomputing only the points whose neighbour list changed.
class DensityCache {
 public:
  DensityCache(PointSet points, std::size_t max_neighbors);

  double density(PointId id) const { return entries_.at(id).density.value; }
  const Density& entry(PointId id) const { return entries_.at(id).density; }
  const PointSet& points() const { return points_; }
  void erase(PointId id);
  std::size_t total_clamped() const;

 private:
  struct Entry {
    Density density;
    std::vector<PointId> neighbors;
  };
  void compute(PointId id);

  PointSet points_;
  std::size_t max_neighbors_;
  std::unordered_map<PointId, Entry> entries_;
  std::unordered_map<PointId, std::set<PointId>> referenced_by_;
};

}  // namespace pgp

#endif  // PGP_DENSITY_HPP
