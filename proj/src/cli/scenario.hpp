#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "latdiff/lattice.hpp"

namespace latdiff::cli {

struct ObservationSpec {
  // Either explicit directions or an angle grid.
  std::vector<Direction> explicit_directions;
  int count = 0;
  double from = 0.0, to = 0.0;

  std::vector<Direction> directions() const;
};

struct RankSpec {
  int m_min = 1;
  int m_max = 12;
  double threshold = 5e-5;
  std::vector<Direction> probes;  // optional explicit probe list (prefixes are used)
};

struct CanonicalSpec {
  std::string formula;  // constants, halfplane, strip, wedge, edge, edge_green
  std::string aux1, aux2;
  std::optional<Direction> beta1, beta2;
  int edge_length = 401;
};

struct Scenario {
  std::string path;
  std::string command;
  Complex wavenumber{0.0, 0.0};
  std::string obstacle_path;
  std::vector<Direction> incidences;
  ObservationSpec observations;
  std::vector<Direction> basis;
  std::string outputs = "out";
  unsigned long long seed = 0;
  int threads = 1;
  bool allow_count_mismatch = false;
  double tolerance = 1e-6;
  int green_radius = 10;
  std::vector<Site> sites;
  std::optional<std::array<int, 4>> field_box;
  int pairs = 10;
  RankSpec rank;
  CanonicalSpec canonical;
};

// Parses a JSON scenario. Relative paths resolve against the scenario's
// directory. Errors carry the offending field name.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& base_dir, const std::string& label);

}  // namespace latdiff::cli
