#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dyncore/weights.hpp"

namespace dyncore {

using PointId = std::uint64_t;

/// A point of the universe. In Euclidean mode `coords` holds the position; in
/// distance-matrix mode `metric_index` is the row of the matrix.
struct Point {
  PointId id = 0;
  std::vector<double> coords;
  std::size_t metric_index = 0;
};

using PointRef = std::shared_ptr<const Point>;

struct WeightedPoint {
  Point point;
  BoundedRational weight;
};

/// Feasible solution: between 1 and k centers from the candidate universe.
struct Solution {
  std::vector<Point> centers;
};

/// Distance function of the universe: Euclidean of a fixed dimension, or an
/// explicit symmetric nonnegative matrix with zero diagonal.
class Metric {
 public:
  Metric() = default;

  static Metric euclidean(std::size_t dimension);
  /// Validates symmetry, nonnegativity and the zero diagonal. With
  /// `strict_triangle`, also rejects matrices violating the triangle inequality.
  static Metric matrix(const std::vector<std::vector<double>>& distances, bool strict_triangle = false);

  [[nodiscard]] bool is_matrix() const { return matrix_ != nullptr; }
  [[nodiscard]] std::size_t dimension() const { return dim_; }
  [[nodiscard]] std::size_t matrix_size() const { return size_; }

  /// Throws InvalidArgument when `p` does not belong to this space.
  void validate(const Point& p) const;

  [[nodiscard]] double distance(const Point& a, const Point& b) const;
  /// distance(a, b)^z for z in {1, 2}.
  [[nodiscard]] double power_distance(const Point& a, const Point& b, int z) const;
  /// Same location (coordinates or matrix row).
  [[nodiscard]] bool same_location(const Point& a, const Point& b) const;

 private:
  Metric(std::size_t dim, std::size_t size, std::shared_ptr<const std::vector<double>> matrix)
      : dim_(dim), size_(size), matrix_(std::move(matrix)) {}

  std::size_t dim_ = 2;
  std::size_t size_ = 0;
  std::shared_ptr<const std::vector<double>> matrix_;
};

/// Whether the triangle inequality holds for every triple of the matrix (O(n^3)).
bool triangle_inequality_holds(const Metric& metric, double tolerance = 1e-12);

/// c(S, X) = sum_x w(x) min_{s in S} d(x, s)^z. Throws on empty S or z not in {1,2}.
double cost(const Solution& solution, std::span<const WeightedPoint> points, int z, const Metric& metric);

/// Checks cost(S, X1 u X2) == cost(S, X1) + cost(S, X2) up to 1e-9 relative.
/// Throws InvalidArgument when X1 and X2 share a point id.
bool linearity_check(const Solution& solution, std::span<const WeightedPoint> first,
                     std::span<const WeightedPoint> second, int z, const Metric& metric);

void validate_power(int z);

}  // namespace dyncore
