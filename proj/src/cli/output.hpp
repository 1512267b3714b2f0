#pragma once

#include <string>
#include <vector>

#include "latdiff/lattice.hpp"

namespace latdiff::cli {

// Fixed 17 significant digits; infinities as inf / -inf.
std::string num(double x);

struct DirectivityRow {
  Direction observation;
  Complex S;
  Complex smod;
  bool flagged = false;
};

extern const char* const kDirectivityHeader;

std::string directivity_csv(const std::vector<DirectivityRow>& rows);
// Inverse of directivity_csv; InputError with the line number on bad input.
std::vector<DirectivityRow> parse_directivity_csv(const std::string& text, const std::string& label);
std::vector<DirectivityRow> load_directivity_csv(const std::string& path);

struct RankRow {
  int M = 0;
  int rank = 0;
  std::vector<double> singular_values;
};

// Header M,rank,sigma_1..sigma_Mmax; shorter rows leave trailing cells empty.
std::string rank_csv(const std::vector<RankRow>& rows);

// ConfigError when the directory cannot be created or the file written.
void ensure_directory(const std::string& dir);
void write_file(const std::string& dir, const std::string& name, const std::string& content);

struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

// Line plot against observation angle (degrees).
std::string svg_plot(const std::string& title, const std::vector<double>& angles,
                     const std::vector<PlotSeries>& series);

}  // namespace latdiff::cli
