#ifndef GEOMETRY_UTILS__GEOMETRY_UTILS_HPP_
#define GEOMETRY_UTILS__GEOMETRY_UTILS_HPP_

#include <cstddef>
#include <vector>

namespace geometry_utils
{

struct Point2D
{
  double x;
  double y;
};

/// Wrap an angle into [-pi, pi).
double normalizeAngle(double angle);

double distance2d(const Point2D & a, const Point2D & b);

double calcCurvature(const Point2D & p0, const Point2D & p1, const Point2D & p2);

std::size_t findNearestIndex(const std::vector<Point2D> & points, const Point2D & target);

double interpolate(double from, double to, double ratio);

bool isInsideRect(const Point2D & point, double half_length, double half_width);

}  // namespace geometry_utils

#endif  // GEOMETRY_UTILS__GEOMETRY_UTILS_HPP_
