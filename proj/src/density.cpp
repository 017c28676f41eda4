#include "pgp/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pgp {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

}  // namespace

PointSet::PointSet(std::span<const Eigen::Vector2d> points) {
  for (std::size_t i = 0; i < points.size(); ++i) points_.emplace(static_cast<PointId>(i), points[i]);
  rebuild();
}

PointSet::PointSet(const std::map<PointId, Eigen::Vector2d>& points) : points_(points) { rebuild(); }

const Eigen::Vector2d& PointSet::position(PointId id) const {
  auto it = points_.find(id);
  if (it == points_.end()) throw std::out_of_range("unknown point id " + std::to_string(id));
  return it->second;
}

std::vector<PointId> PointSet::ids() const {
  std::vector<PointId> out;
  out.reserve(points_.size());
  for (const auto& [id, _] : points_) out.push_back(id);
  return out;
}

PointSet::CellKey PointSet::cell_of(const Eigen::Vector2d& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_))};
}

void PointSet::bucket(PointId id, const Eigen::Vector2d& p) {
  const CellKey key = cell_of(p);
  cells_[key].push_back(id);
  if (min_cx_ > max_cx_) {
    min_cx_ = max_cx_ = key.first;
    min_cy_ = max_cy_ = key.second;
  } else {
    min_cx_ = std::min(min_cx_, key.first);
    max_cx_ = std::max(max_cx_, key.first);
    min_cy_ = std::min(min_cy_, key.second);
    max_cy_ = std::max(max_cy_, key.second);
  }
}

void PointSet::rebuild() {
  for (const auto& [id, p] : points_) {
    if (!p.allFinite()) throw std::invalid_argument("point " + std::to_string(id) + " is not finite");
  }
  auto fill = [this] {
    cells_.clear();
    min_cx_ = min_cy_ = 0;
    max_cx_ = max_cy_ = -1;
    for (const auto& [id, p] : points_) bucket(id, p);
  };

  cell_ = 1.0;
  if (points_.size() >= 2) {
    Eigen::Vector2d lo = points_.begin()->second, hi = lo;
    for (const auto& [_, p] : points_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector2d extent = hi - lo;
    const auto n = static_cast<double>(points_.size());
    // Nearly collinear sets: spread the points along the longer side.
    const double side = extent.maxCoeff();
    const double area = std::max(extent.x() * extent.y(), side * side / n);
    const double provisional = std::sqrt(area / n);
    if (std::isfinite(provisional) && provisional > 0.0) cell_ = provisional;
    fill();

    std::vector<double> nearest;
    nearest.reserve(points_.size());
    for (const auto& [id, p] : points_) {
      const auto nn = search(p, 1, &id);
      if (!nn.empty()) nearest.push_back(nn.front().distance);
    }
    auto mid = nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2);
    std::nth_element(nearest.begin(), mid, nearest.end());
    // Degenerate medians (duplicates) keep the provisional size.
    if (*mid > 1e-3 * cell_) cell_ = *mid;
  }
  fill();
  built_size_ = points_.size();
}

void PointSet::insert(PointId id, const Eigen::Vector2d& p) {
  if (!p.allFinite()) throw std::invalid_argument("point " + std::to_string(id) + " is not finite");
  if (!points_.emplace(id, p).second) throw std::invalid_argument("duplicate point id " + std::to_string(id));
  if (points_.size() > 2 * std::max<std::size_t>(built_size_, 8)) {
    rebuild();
  } else {
    bucket(id, p);
  }
}

void PointSet::erase(PointId id) {
  auto it = points_.find(id);
  if (it == points_.end()) throw std::out_of_range("unknown point id " + std::to_string(id));
  auto cell = cells_.find(cell_of(it->second));
  auto& members = cell->second;
  members.erase(std::find(members.begin(), members.end(), id));
  if (members.empty()) cells_.erase(cell);
  points_.erase(it);
  if (2 * points_.size() < built_size_) rebuild();
}

std::vector<Neighbor> PointSet::search(const Eigen::Vector2d& q, std::size_t k, const PointId* exclude) const {
  std::vector<Neighbor> found;
  if (k == 0 || points_.empty()) return found;
  const auto [cx, cy] = cell_of(q);
  const std::int64_t last_ring =
      std::max({cx - min_cx_, max_cx_ - cx, cy - min_cy_, max_cy_ - cy, std::int64_t{0}});

  // Sweeping rings over a mostly empty grid costs more than a linear scan.
  const auto side = static_cast<double>(2 * last_ring + 1);
  if (side * side > 16.0 * static_cast<double>(points_.size()) + 64.0) {
    for (const auto& [id, p] : points_) {
      if (!exclude || id != *exclude) found.push_back({id, (p - q).norm()});
    }
    const std::size_t keep = std::min(k, found.size());
    std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(keep), found.end(), closer);
    found.resize(keep);
    return found;
  }

  auto visit = [&](std::int64_t x, std::int64_t y) {
    auto it = cells_.find({x, y});
    if (it == cells_.end()) return;
    for (PointId id : it->second) {
      if (exclude && id == *exclude) continue;
      found.push_back({id, (points_.at(id) - q).norm()});
    }
  };

  for (std::int64_t r = 0; r <= last_ring; ++r) {
    if (r == 0) {
      visit(cx, cy);
    } else {
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        visit(cx + dx, cy - r);
        visit(cx + dx, cy + r);
      }
      for (std::int64_t dy = -r + 1; dy <= r - 1; ++dy) {
        visit(cx - r, cy + dy);
        visit(cx + r, cy + dy);
      }
    }
    if (found.size() >= k) {
      std::nth_element(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(k - 1), found.end(), closer);
      // Anything not yet visited is at least r cells away.
      if (found[k - 1].distance < static_cast<double>(r) * cell_) break;
    }
  }
  const std::size_t keep = std::min(k, found.size());
  std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(keep), found.end(), closer);
  found.resize(keep);
  return found;
}

std::vector<Neighbor> PointSet::knn(PointId id, std::size_t k) const { return search(position(id), k, &id); }

std::vector<Neighbor> PointSet::knn(const Eigen::Vector2d& q, std::size_t k) const { return search(q, k, nullptr); }

std::vector<Neighbor> PointSet::within(PointId id, double r) const {
  const Eigen::Vector2d& q = position(id);
  std::vector<Neighbor> out;
  const auto reach = static_cast<double>(std::max(max_cx_ - min_cx_, max_cy_ - min_cy_) + 1);
  if (r / cell_ > reach) {
    for (const auto& [other, p] : points_) {
      const double d = (p - q).norm();
      if (other != id && d < r) out.push_back({other, d});
    }
  } else {
    const auto [cx, cy] = cell_of(q);
    const auto span = static_cast<std::int64_t>(std::ceil(r / cell_));
    for (std::int64_t x = cx - span; x <= cx + span; ++x) {
      for (std::int64_t y = cy - span; y <= cy + span; ++y) {
        auto it = cells_.find({x, y});
        if (it == cells_.end()) continue;
        for (PointId other : it->second) {
          const double d = (points_.at(other) - q).norm();
          if (other != id && d < r) out.push_back({other, d});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), closer);
  return out;
}

double r_density(const PointSet& ps, PointId id, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("r-density radius must be positive");
  const auto inside = ps.within(id, r);
  return static_cast<double>(inside.size()) / (std::numbers::pi * r * r);
}

namespace {

Density inverse_distance_sum(const std::vector<Neighbor>& neighbors) {
  Density d;
  double sum = 0.0;
  for (const Neighbor& n : neighbors) {
    double dist = n.distance;
    if (dist < kMinPointDistance) {
      dist = kMinPointDistance;
      ++d.clamped;
    }
    sum += 1.0 / dist;
  }
  d.value = sum / std::numbers::pi;
  return d;
}

}  // namespace

Density sid_exact(const PointSet& ps, PointId id) {
  const Eigen::Vector2d& q = ps.position(id);
  std::vector<Neighbor> all;
  all.reserve(ps.size());
  for (PointId other : ps.ids()) {
    if (other != id) all.push_back({other, (ps.position(other) - q).norm()});
  }
  // Summing nearest-first keeps the dominant terms exact.
  std::sort(all.begin(), all.end(), closer);
  return inverse_distance_sum(all);
}

Density sid_truncated(const PointSet& ps, PointId id, std::size_t max_neighbors) {
  if (max_neighbors == 0) throw std::invalid_argument("neighbour truncation must be at least 1");
  return inverse_distance_sum(ps.knn(id, max_neighbors));
}

std::vector<Neighbor> knn(const PointSet& ps, PointId id, std::size_t k) { return ps.knn(id, k); }

DensityCache::DensityCache(PointSet points, std::size_t max_neighbors)
    : points_(std::move(points)), max_neighbors_(max_neighbors) {
  if (max_neighbors_ == 0) throw std::invalid_argument("neighbour truncation must be at least 1");
  for (PointId id : points_.ids()) compute(id);
}

void DensityCache::compute(PointId id) {
  Entry& entry = entries_[id];
  for (PointId n : entry.neighbors) referenced_by_[n].erase(id);
  const auto nn = points_.knn(id, max_neighbors_);
  entry.density = inverse_distance_sum(nn);
  entry.neighbors.clear();
  for (const Neighbor& n : nn) {
    entry.neighbors.push_back(n.id);
    referenced_by_[n.id].insert(id);
  }
}

void DensityCache::erase(PointId id) {
  points_.erase(id);
  for (PointId n : entries_.at(id).neighbors) referenced_by_[n].erase(id);
  entries_.erase(id);
  auto affected_it = referenced_by_.find(id);
  if (affected_it == referenced_by_.end()) return;
  const std::set<PointId> affected = std::move(affected_it->second);
  referenced_by_.erase(affected_it);
  for (PointId u : affected) compute(u);
  referenced_by_.erase(id);
}

std::size_t DensityCache::total_clamped() const {
  std::size_t total = 0;
  for (const auto& [_, e] : entries_) total += e.density.clamped;
  return total;
}

}  // namespace pgp
