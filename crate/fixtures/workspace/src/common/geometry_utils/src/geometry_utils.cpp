#include "geometry_utils/geometry_utils.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace geometry_utils
{

namespace
{
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double normalizeAngle(double angle)
{
  const double wrapped = std::fmod(angle + kPi, 2.0 * kPi);
  if (wrapped < 0.0) {
    return wrapped + kPi;
  }
  return wrapped - kPi;
}

double distance2d(const Point2D & a, const Point2D & b)
{
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return std::hypot(dx, dy);
}

double calcCurvature(const Point2D & p0, const Point2D & p1, const Point2D & p2)
{
  const double a = distance2d(p0, p1);
  const double b = distance2d(p1, p2);
  const double c = distance2d(p2, p0);
  const double denominator = a * b * c;
  if (denominator < std::numeric_limits<double>::epsilon()) {
    return 0.0;
  }
  const double cross = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
  return 2.0 * cross / denominator;
}

std::size_t findNearestIndex(const std::vector<Point2D> & points, const Point2D & target)
{
  if (points.empty()) {
    throw std::invalid_argument("points must not be empty");
  }
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = distance2d(points[i], target);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  return nearest;
}

double interpolate(double from, double to, double ratio)
{
  const double clamped = ratio < 0.0 ? 0.0 : (ratio > 1.0 ? 1.0 : ratio);
  return from + (to - from) * clamped;
}

bool isInsideRect(const Point2D & point, double half_length, double half_width)
{
  if (std::abs(point.x) > half_length) {
    return false;
  } else if (std::abs(point.y) > half_width) {
    return false;
  }
  return true;
}

}  // namespace geometry_utils
