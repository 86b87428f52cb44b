#include "dyncore/metric.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "dyncore/errors.hpp"

namespace dyncore {

Metric Metric::euclidean(std::size_t dimension) {
  if (dimension == 0) throw InvalidArgument("dimension must be at least 1");
  return Metric(dimension, 0, nullptr);
}

Metric Metric::matrix(const std::vector<std::vector<double>>& distances, bool strict_triangle) {
  const std::size_t n = distances.size();
  if (n == 0) throw InvalidArgument("distance matrix is empty");
  auto flat = std::make_shared<std::vector<double>>(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (distances[i].size() != n) throw InvalidArgument("distance matrix is not square");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = distances[i][j];
      if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("distance matrix has a negative or non-finite entry");
      (*flat)[i * n + j] = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if ((*flat)[i * n + i] != 0.0) throw InvalidArgument("distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((*flat)[i * n + j] != (*flat)[j * n + i]) throw InvalidArgument("distance matrix is not symmetric");
    }
  }
  Metric m(0, n, std::move(flat));
  if (strict_triangle && !triangle_inequality_holds(m)) {
    throw InvalidArgument("distance matrix violates the triangle inequality");
  }
  return m;
}

void Metric::validate(const Point& p) const {
  if (is_matrix()) {
    if (p.metric_index >= size_) {
      throw InvalidArgument("matrix index " + std::to_string(p.metric_index) + " out of range");
    }
    return;
  }
  if (p.coords.size() != dim_) {
    throw InvalidArgument("point " + std::to_string(p.id) + " has dimension " + std::to_string(p.coords.size()) +
                          ", expected " + std::to_string(dim_));
  }
  for (double c : p.coords) {
    if (!std::isfinite(c)) throw InvalidArgument("point " + std::to_string(p.id) + " has a non-finite coordinate");
  }
}

double Metric::distance(const Point& a, const Point& b) const {
  if (is_matrix()) {
    if (a.metric_index >= size_ || b.metric_index >= size_) throw InvalidArgument("matrix index out of range");
    return (*matrix_)[a.metric_index * size_ + b.metric_index];
  }
  if (a.coords.size() != dim_ || b.coords.size() != dim_) throw InvalidArgument("dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double d = a.coords[i] - b.coords[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double Metric::power_distance(const Point& a, const Point& b, int z) const {
  if (z == 2 && !is_matrix()) {
    if (a.coords.size() != dim_ || b.coords.size() != dim_) throw InvalidArgument("dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double d = a.coords[i] - b.coords[i];
      sum += d * d;
    }
    return sum;
  }
  const double d = distance(a, b);
  return z == 1 ? d : d * d;
}

bool Metric::same_location(const Point& a, const Point& b) const {
  if (is_matrix()) return a.metric_index == b.metric_index;
  return a.coords == b.coords;
}

bool triangle_inequality_holds(const Metric& metric, double tolerance) {
  if (!metric.is_matrix()) return true;
  const std::size_t n = metric.matrix_size();
  std::vector<Point> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i].metric_index = i;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dij = metric.distance(pts[i], pts[j]);
      for (std::size_t k = 0; k < n; ++k) {
        if (dij > metric.distance(pts[i], pts[k]) + metric.distance(pts[k], pts[j]) + tolerance) return false;
      }
    }
  }
  return true;
}

void validate_power(int z) {
  if (z != 1 && z != 2) throw InvalidArgument("z must be 1 (k-median) or 2 (k-means)");
}

double cost(const Solution& solution, std::span<const WeightedPoint> points, int z, const Metric& metric) {
  validate_power(z);
  if (solution.centers.empty()) throw InvalidArgument("solution has no centers");
  long double total = 0.0L;
  for (const auto& wp : points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : solution.centers) best = std::min(best, metric.power_distance(wp.point, c, z));
    total += static_cast<long double>(wp.weight.to_double()) * best;
  }
  return static_cast<double>(total);
}

bool linearity_check(const Solution& solution, std::span<const WeightedPoint> first,
                     std::span<const WeightedPoint> second, int z, const Metric& metric) {
  std::unordered_set<PointId> ids;
  for (const auto& p : first) ids.insert(p.point.id);
  std::vector<WeightedPoint> joined(first.begin(), first.end());
  for (const auto& p : second) {
    if (ids.count(p.point.id) != 0) {
      throw InvalidArgument("point " + std::to_string(p.point.id) + " appears in both sets");
    }
    joined.push_back(p);
  }
  const double whole = cost(solution, joined, z, metric);
  const double parts = cost(solution, first, z, metric) + cost(solution, second, z, metric);
  const double scale = std::max({std::abs(whole), std::abs(parts), 1e-300});
  return std::abs(whole - parts) <= 1e-9 * scale;
}

}  // namespace dyncore
