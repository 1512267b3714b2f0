#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "latdiff/errors.hpp"

namespace latdiff::cli {

namespace fs = std::filesystem;

const char* const kDirectivityHeader = "beta,obs_m,obs_n,S_re,S_im,Smod_re,Smod_im,flag";

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  if (x == 0.0) x = 0.0;  // no negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string directivity_csv(const std::vector<DirectivityRow>& rows) {
  std::string out = kDirectivityHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += num(r.observation.beta()) + ',' + num(r.observation.m()) + ',' + num(r.observation.n()) + ',' +
           num(r.S.real()) + ',' + num(r.S.imag()) + ',' + num(r.smod.real()) + ',' + num(r.smod.imag()) + ',' +
           (r.flagged ? "factor_zero" : "ok") + '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, const std::string& where) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (cell.empty() || end != begin + cell.size()) throw InputError(where + ": not a number: '" + cell + "'");
  return v;
}

}  // namespace

std::vector<DirectivityRow> parse_directivity_csv(const std::string& text, const std::string& label) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kDirectivityHeader)
    throw InputError(label + ":1: expected header '" + std::string(kDirectivityHeader) + "'");
  std::vector<DirectivityRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string where = label + ":" + std::to_string(lineno);
    auto c = split(line);
    if (c.size() != 8) throw InputError(where + ": expected 8 columns");
    if (c[7] != "ok" && c[7] != "factor_zero") throw InputError(where + ": flag must be ok or factor_zero");
    try {
      DirectivityRow r{Direction(parse_double(c[1], where), parse_double(c[2], where)),
                       {parse_double(c[3], where), parse_double(c[4], where)},
                       {parse_double(c[5], where), parse_double(c[6], where)},
                       c[7] == "factor_zero"};
      rows.push_back(r);
    } catch (const InputError& e) {
      std::string msg = e.what();
      if (msg.rfind(where, 0) == 0) throw;
      throw InputError(where + ": " + msg);
    }
  }
  return rows;
}

std::vector<DirectivityRow> load_directivity_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_directivity_csv(ss.str(), path);
}

std::string rank_csv(const std::vector<RankRow>& rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.singular_values.size());
  std::string out = "M,rank";
  for (std::size_t i = 1; i <= width; ++i) out += ",sigma_" + std::to_string(i);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.M) + ',' + std::to_string(r.rank);
    for (std::size_t i = 0; i < width; ++i) {
      out += ',';
      if (i < r.singular_values.size()) out += num(r.singular_values[i]);
    }
    out += '\n';
  }
  return out;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  ensure_directory(dir);
  fs::path p = fs::path(dir) / name;
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << content;
  out.flush();
  if (!out) throw ConfigError("write failed for " + p.string());
}

std::string svg_plot(const std::string& title, const std::vector<double>& angles,
                     const std::vector<PlotSeries>& series) {
  const double W = 720, H = 420, L = 60, R = 20, T = 40, B = 50;
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  double ymax = 0.0;
  for (const auto& s : series)
    for (double v : s.values)
      if (std::isfinite(v)) ymax = std::max(ymax, v);
  if (ymax <= 0.0) ymax = 1.0;
  auto px = [&](double a) { return L + (W - L - R) * (a * 180.0 / std::numbers::pi) / 360.0; };
  auto py = [&](double v) { return H - B - (H - T - B) * v / ymax; };

  std::ostringstream o;
  char buf[128];
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int deg = 0; deg <= 360; deg += 45) {
    double x = px(deg * std::numbers::pi / 180.0);
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"11\">%d</text>\n",
                  x, H - B + 16, deg);
    o << buf;
  }
  for (int i = 0; i <= 4; ++i) {
    double v = ymax * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"11\">%.3g</text>\n",
                  L - 6, py(v) + 4, v);
    o << buf;
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-size=\"12\">observation angle (deg)</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* colour = colours[k % 5];
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"" << (k ? " stroke-dasharray=\"5,3\"" : "")
      << " points=\"";
    for (std::size_t i = 0; i < angles.size() && i < series[k].values.size(); ++i) {
      if (!std::isfinite(series[k].values[i])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(angles[i]), py(series[k].values[i]));
      o << buf;
    }
    o << "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">", W - R - 150,
                  T + 14.0 + 16.0 * k, colour);
    o << buf << series[k].name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace latdiff::cli
