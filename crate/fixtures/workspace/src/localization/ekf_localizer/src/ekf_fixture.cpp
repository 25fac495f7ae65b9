#include "ekf_localizer/ekf_fixture.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ekf_localizer
{

namespace
{
constexpr double kPi = 3.14159265358979323846;
constexpr double kGateThreshold = 9.0;

double square(double value)
{
  return value * value;
}
}  // namespace

StateBuffer::StateBuffer(std::size_t capacity) : capacity_(capacity) {}

void StateBuffer::push(const Pose2D & pose)
{
  if (poses_.size() >= capacity_) {
    poses_.erase(poses_.begin());
  }
  poses_.push_back(pose);
}

/**
 * @brief Return the pose stored at the given position.
 * @throws std::out_of_range when the buffer is empty or the index is invalid.
 */
Pose2D StateBuffer::at(std::size_t index) const
{
  if (poses_.empty()) {
    throw std::out_of_range("StateBuffer is empty");
  }
  return poses_.at(index);
}

std::size_t StateBuffer::size() const
{
  return poses_.size();
}

EKFModule::EKFModule(double process_noise, double measurement_noise)
: process_noise_(process_noise),
  measurement_noise_(measurement_noise),
  prior_variance_(1.0),
  update_count_(0),
  state_{0.0, 0.0, 0.0}
{
}

/// Propagate a pose with a constant velocity and yaw-rate model.
/// Returns the input pose unchanged when dt is not positive.
Pose2D EKFModule::predict(const Pose2D & pose, double velocity, double yaw_rate, double dt) const
{
  if (dt <= 0.0) {
    return pose;
  }
  Pose2D next = pose;
  next.x += velocity * std::cos(pose.yaw) * dt;
  next.y += velocity * std::sin(pose.yaw) * dt;
  next.yaw = normalizeYaw(pose.yaw + yaw_rate * dt);
  return next;
}

double EKFModule::measurementGate(double innovation, double variance) const
{
  if (variance <= 0.0) {
    return 0.0;
  }
  const double distance = square(innovation) / variance;
  return distance > kGateThreshold ? 0.0 : 1.0;
}

bool EKFModule::update(const Pose2D & measurement, double variance)
{
  if (measurementGate(measurement.x - state_.x, variance) == 0.0) {
    return false;
  }
  const double gain = computeGain(prior_variance_, variance);
  state_.x += gain * (measurement.x - state_.x);
  state_.y += gain * (measurement.y - state_.y);
  state_.yaw = normalizeYaw(state_.yaw + gain * (measurement.yaw - state_.yaw));
  prior_variance_ = (1.0 - gain) * prior_variance_ + process_noise_;
  ++update_count_;
  return true;
}

// Human readable status used in diagnostics.
std::string EKFModule::statusMessage(int code) const
{
  switch (code) {
    case 0:
      return "ok";
    case 1:
      return "warn: delayed measurement";
    case 2:
      return "error: diverged";
    default:
      break;
  }
  return "unknown";
}

double EKFModule::processNoise() const
{
  return process_noise_ > 0.0 ? scaleNoise(process_noise_) : 0.0;
}

double EKFModule::computeGain(double prior_variance, double measurement_variance) const
{
  const double denominator = prior_variance + measurement_variance + measurement_noise_;
  if (denominator <= 0.0) {
    return 0.0;
  }
  return prior_variance / denominator;
}

/// Wrap a yaw angle into the range [-pi, pi].
double normalizeYaw(double yaw)
{
  while (yaw > kPi) {
    yaw -= 2.0 * kPi;
  }
  while (yaw < -kPi) {
    yaw += 2.0 * kPi;
  }
  return yaw;
}

/**
 * @brief Clamp a variance into [lower, upper].
 * @throws std::invalid_argument if lower is greater than upper.
 */
double clampVariance(double variance, double lower, double upper)
{
  if (lower > upper) {
    throw std::invalid_argument("lower bound exceeds upper bound");
  }
  return clampValue<double>(variance, lower, upper);
}

/** Count measurements whose magnitude stays below the threshold. */
int countValidMeasurements(const std::vector<double> & values, double threshold)
{
  int count = 0;
  for (const double value : values) {
    if (std::abs(value) < threshold) {
      ++count;
    }
  }
  return count;
}

/**
 * @brief Weighted mean of the values.
 * @return 0 when all weights are zero.
 */
double weightedAverage(const std::vector<double> & values, const std::vector<double> & weights)
{
  if (values.size() != weights.size()) {
    throw std::invalid_argument("size mismatch");
  }
  double sum = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i] * weights[i];
    total += weights[i];
  }
  if (total == 0.0) {
    return 0.0;
  }
  return sum / total;
}

/// Parse an integer mode flag; returns -1 for malformed or out-of-range text.
int parseModeFlag(const std::string & text)
{
  try {
    return std::stoi(text);
  } catch (const std::invalid_argument &) {
    return -1;
  } catch (const std::out_of_range &) {
    return -1;
  }
}

// noise scaling by discrete level
double scaleNoise(int level)
{
  if (level < 0) {
    return 0.0;
  }
  return 0.5 * level;
}

double scaleNoise(double factor)
{
  return factor * factor;
}

// ---------------------------------------------------------------------------
// buffered access helpers

double safeRead(const std::vector<double> & values, std::size_t index)
{
  std::size_t i = 0;
  double last = 0.0;
  do {
    last = values.at(i);
    ++i;
  } while (i <= index);
  return last;
}

}  // namespace ekf_localizer
