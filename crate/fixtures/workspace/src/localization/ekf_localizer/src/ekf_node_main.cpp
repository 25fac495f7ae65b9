#include "ekf_localizer/ekf_fixture.hpp"

#include <iostream>
#include <string>

namespace ekf_localizer
{

int runNode(int argc, char ** argv)
{
  EKFModule module(0.1, 0.2);
  StateBuffer buffer(16);
  for (int i = 1; i < argc; ++i) {
    const int mode = parseModeFlag(argv[i]);
    if (mode < 0) {
      std::cerr << module.statusMessage(2) << std::endl;
      return 1;
    }
    buffer.push(module.predict(module.state(), 1.0, 0.1 * mode, 0.1));
  }
  std::cout << "processed " << buffer.size() << " poses" << std::endl;
  return 0;
}

}  // namespace ekf_localizer
