#ifndef EKF_LOCALIZER__EKF_FIXTURE_HPP_
#define EKF_LOCALIZER__EKF_FIXTURE_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace ekf_localizer
{

struct Pose2D
{
  double x;
  double y;
  double yaw;
};

class StateBuffer
{
public:
  explicit StateBuffer(std::size_t capacity);
  void push(const Pose2D & pose);
  Pose2D at(std::size_t index) const;
  std::size_t size() const;
  bool empty() const { return poses_.empty(); }

private:
  std::size_t capacity_;
  std::vector<Pose2D> poses_;
};

class EKFModule
{
public:
  EKFModule(double process_noise, double measurement_noise);
  Pose2D predict(const Pose2D & pose, double velocity, double yaw_rate, double dt) const;
  double measurementGate(double innovation, double variance) const;
  bool update(const Pose2D & measurement, double variance);
  std::string statusMessage(int code) const;
  const Pose2D & state() const { return state_; }

protected:
  double processNoise() const;

private:
  double computeGain(double prior_variance, double measurement_variance) const;

  double process_noise_;
  double measurement_noise_;
  double prior_variance_;
  int update_count_;
  Pose2D state_;
};

double normalizeYaw(double yaw);
double clampVariance(double variance, double lower, double upper);
int countValidMeasurements(const std::vector<double> & values, double threshold);
double weightedAverage(const std::vector<double> & values, const std::vector<double> & weights);
int parseModeFlag(const std::string & text);
double scaleNoise(int level);
double scaleNoise(double factor);
double safeRead(const std::vector<double> & values, std::size_t index);

template <typename T>
T clampValue(T value, T lower, T upper)
{
  return value < lower ? lower : (value > upper ? upper : value);
}

int runNode(int argc, char ** argv);

}  // namespace ekf_localizer

#endif  // EKF_LOCALIZER__EKF_FIXTURE_HPP_
