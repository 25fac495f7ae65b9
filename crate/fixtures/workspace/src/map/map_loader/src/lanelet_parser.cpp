#include "map_loader/lanelet_parser.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace map_loader
{

int parseLaneId(const std::string & token)
{
  if (token.empty() || token[0] != 'L') {
    return -1;
  }
  int id = 0;
  for (std::size_t i = 1; i < token.size(); ++i) {
    const char c = token[i];
    if (c < '0' || c > '9') {
      return -1;
    }
    id = id * 10 + (c - '0');
  }
  return id;
}

std::vector<std::string> splitTokens(const std::string & line, char delimiter)
{
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : line) {
    if (c == delimiter) {
      tokens.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  tokens.push_back(current);
  return tokens;
}

void LaneletMap::addLane(int id, double length)
{
  if (length < 0.0) {
    throw std::invalid_argument("negative lane length");
  }
  lanes_[id] = length;
}

double LaneletMap::totalLength() const
{
  double total = 0.0;
  for (const auto & entry : lanes_) {
    total += entry.second;
  }
  return total;
}

bool LaneletMap::hasLane(int id) const
{
  return lanes_.count(id) > 0;
}

int LaneletMap::loadFromLine(const std::string & line)
{
  int loaded = 0;
  for (const auto & token : splitTokens(line, ',')) {
    const int id = parseLaneId(token);
    if (id >= 0) {
      addLane(id, 1.0);
      ++loaded;
    }
  }
  return loaded;
}

}  // namespace map_loader
