#ifndef MAP_LOADER__LANELET_PARSER_HPP_
#define MAP_LOADER__LANELET_PARSER_HPP_

#include <map>
#include <string>
#include <vector>

namespace map_loader
{

int parseLaneId(const std::string & token);

std::vector<std::string> splitTokens(const std::string & line, char delimiter);

class LaneletMap
{
public:
  void addLane(int id, double length);
  double totalLength() const;
  bool hasLane(int id) const;
  int loadFromLine(const std::string & line);

private:
  std::map<int, double> lanes_;
};

}  // namespace map_loader

#endif  // MAP_LOADER__LANELET_PARSER_HPP_
