#include <gtest/gtest.h>

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "ekf_localizer/ekf_fixture.hpp"

TEST(Assertion, ValueMismatch)
{
  EXPECT_EQ(ekf_localizer::parseModeFlag("7"), 8);
}

TEST(Assertion, NothingThrown)
{
  EXPECT_THROW(ekf_localizer::parseModeFlag("x"), std::invalid_argument);
}

TEST(Assertion, FailedToDie)
{
  EXPECT_DEATH(ekf_localizer::normalizeYaw(1.0), "");
}

TEST(Exception, VectorRange)
{
  std::vector<double> values{1.0, 2.0};
  EXPECT_DOUBLE_EQ(ekf_localizer::safeRead(values, 5), 2.0);
}

TEST(Exception, ParseNumber)
{
  int level = std::stoi("high");
  EXPECT_GT(ekf_localizer::scaleNoise(level), 0.0);
}

TEST(Exception, Runtime)
{
  ekf_localizer::EKFModule ekf(0.1, 0.2);
  if (ekf.state().x == 0.0) {
    throw std::runtime_error("sensor offline");
  }
}

TEST(Crash, Terminate)
{
  auto read = []() noexcept {
    ekf_localizer::StateBuffer buffer(1);
    buffer.push({0.0, 0.0, 0.0});
    return buffer.at(4);
  };
  EXPECT_DOUBLE_EQ(read().x, 0.0);
}

TEST(Crash, Abort)
{
  std::abort();
}

TEST(Hang, Spin)
{
  volatile bool done = false;
  while (!done) {
  }
}
