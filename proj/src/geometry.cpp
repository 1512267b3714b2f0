#include "latdiff/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>

#include "latdiff/errors.hpp"

namespace latdiff {

namespace {

std::string site_str(Site s) { return "(" + std::to_string(s.m) + "," + std::to_string(s.n) + ")"; }

constexpr Site kEast{1, 0}, kWest{-1, 0}, kNorth{0, 1}, kSouth{0, -1};
// Unit cells around a node, counter-clockwise; consecutive cells share an edge.
constexpr std::array<std::pair<Site, Site>, 4> kCells = {
    std::pair{kEast, kNorth}, std::pair{kWest, kNorth}, std::pair{kWest, kSouth}, std::pair{kEast, kSouth}};

bool cell_exterior(const Obstacle& o, Site v, Site e1, Site e2) {
  return !(o.contains(v + e1) && o.contains(v + e2) && o.contains(v + e1 + e2));
}

}  // namespace

Obstacle::Obstacle(std::vector<Site> nodes, std::string name) : nodes_(std::move(nodes)), name_(std::move(name)) {
  if (nodes_.empty()) throw InputError("obstacle '" + name_ + "' has no nodes");
  std::sort(nodes_.begin(), nodes_.end());
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (nodes_[i] == nodes_[i - 1]) throw InputError("obstacle '" + name_ + "' repeats site " + site_str(nodes_[i]));
  lookup_.insert(nodes_.begin(), nodes_.end());
  lo_ = hi_ = nodes_.front();
  for (Site s : nodes_) {
    lo_ = {std::min(lo_.m, s.m), std::min(lo_.n, s.n)};
    hi_ = {std::max(hi_.m, s.m), std::max(hi_.n, s.n)};
  }
  std::unordered_set<Site, SiteHash> seen;
  for (Site start : nodes_) {
    if (seen.count(start)) continue;
    std::vector<Site> comp{start}, stack{start};
    seen.insert(start);
    while (!stack.empty()) {
      Site v = stack.back();
      stack.pop_back();
      for (Site e : kAxisSteps) {
        Site w = v + e;
        if (contains(w) && !seen.count(w)) {
          seen.insert(w);
          comp.push_back(w);
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components_.push_back(std::move(comp));
  }
}

Obstacle Obstacle::parse(std::istream& in, std::string name) {
  std::vector<Site> nodes;
  std::map<Site, int> first_line;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    long long m, n;
    if (!(ss >> m)) {
      std::string rest;
      ss.clear();
      if (ss >> rest) throw InputError(name + ":" + std::to_string(lineno) + ": expected two integers");
      continue;
    }
    std::string extra;
    if (!(ss >> n) || (ss >> extra))
      throw InputError(name + ":" + std::to_string(lineno) + ": expected two integers");
    if (std::abs(m) > 1000000 || std::abs(n) > 1000000)
      throw InputError(name + ":" + std::to_string(lineno) + ": site index out of range");
    Site s{static_cast<int>(m), static_cast<int>(n)};
    auto [it, fresh] = first_line.emplace(s, lineno);
    if (!fresh)
      throw InputError(name + ":" + std::to_string(lineno) + ": duplicate site " + site_str(s) +
                       " (first on line " + std::to_string(it->second) + ")");
    nodes.push_back(s);
  }
  if (nodes.empty()) throw InputError(name + ": obstacle file has no sites");
  return Obstacle(std::move(nodes), std::move(name));
}

Obstacle Obstacle::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open obstacle file " + path);
  return parse(in, path);
}

Obstacle rectangle(int m0, int n0, int width, int height, std::string name) {
  if (width < 1 || height < 1) throw InputError("rectangle needs positive extent");
  std::vector<Site> v;
  for (int m = 0; m < width; ++m)
    for (int n = 0; n < height; ++n) v.push_back({m0 + m, n0 + n});
  return Obstacle(std::move(v), std::move(name));
}

Obstacle right_angle(int arm, std::string name) {
  if (arm < 1) throw InputError("right angle arm must be positive");
  std::vector<Site> v;
  for (int m = 0; m < arm; ++m) v.push_back({m, 0});
  for (int n = 1; n < arm; ++n) v.push_back({0, n});
  return Obstacle(std::move(v), std::move(name));
}

const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::straight: return "straight";
    case BoundaryKind::external_right_angle: return "external_right_angle";
    case BoundaryKind::internal_right_angle: return "internal_right_angle";
    case BoundaryKind::degenerate: return "degenerate";
  }
  return "?";
}

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::endpoint ? "endpoint" : "convex_corner";
}

std::vector<std::pair<Site, Complex>> BoundaryNode::weights(const Wavenumber& k) const {
  std::vector<std::pair<Site, Complex>> w;
  w.reserve(neighbor_weights.size() + 1);
  Complex self = static_cast<double>(exterior_cells) * (0.25 * k.squared() - 1.0);
  bool placed = false;
  for (auto [s, c] : neighbor_weights) {
    if (!placed && site < s) {
      w.emplace_back(site, self);
      placed = true;
    }
    w.emplace_back(s, Complex(c));
  }
  if (!placed) w.emplace_back(site, self);
  return w;
}

std::vector<BoundaryNode> classify_boundary(const Obstacle& obstacle) {
  std::vector<BoundaryNode> out;
  for (Site v : obstacle.nodes()) {
    std::array<bool, 4> ext_cell{};
    int count = 0;
    std::map<Site, double> nw;
    for (int i = 0; i < 4; ++i) {
      auto [e1, e2] = kCells[i];
      if (!cell_exterior(obstacle, v, e1, e2)) continue;
      ext_cell[i] = true;
      ++count;
      nw[v + e1] += 0.5;
      nw[v + e2] += 0.5;
    }
    if (count == 0) continue;

    BoundaryNode b;
    b.site = v;
    b.exterior_cells = count;
    for (auto [s, c] : nw) {
      b.neighbor_weights.emplace_back(s, c);
      (obstacle.contains(s) ? b.boundary_neighbors : b.exterior_neighbors).push_back(s);
    }

    bool opposite = (!obstacle.contains(v + kEast) && !obstacle.contains(v + kWest)) ||
                    (!obstacle.contains(v + kNorth) && !obstacle.contains(v + kSouth));
    if (opposite) {
      b.kind = BoundaryKind::degenerate;
    } else if (count == 1) {
      b.kind = BoundaryKind::internal_right_angle;
    } else if (count == 2) {
      bool adjacent = false;
      for (int i = 0; i < 4; ++i) adjacent |= ext_cell[i] && ext_cell[(i + 1) % 4];
      b.kind = adjacent ? BoundaryKind::straight : BoundaryKind::degenerate;
    } else if (count == 3) {
      b.kind = BoundaryKind::external_right_angle;
    } else {
      // Two perpendicular obstacle neighbours with an exterior cell between
      // them: the elbow of a width-one bend, concave on its inner side.
      b.kind = BoundaryKind::internal_right_angle;
    }
    out.push_back(std::move(b));
  }
  return out;
}

Complex normal_derivative(const FieldSampler& values, const BoundaryNode& node, const Wavenumber& k) {
  Complex sum = static_cast<double>(node.exterior_cells) * (0.25 * k.squared() - 1.0) * sample(values, node.site);
  for (auto [s, c] : node.neighbor_weights) sum += c * sample(values, s);
  return sum;
}

Complex green_identity_sum(const std::vector<BoundaryNode>& boundary, const FieldSampler& u,
                           const FieldSampler& w, const Wavenumber& k) {
  Complex sum = 0.0;
  for (const auto& b : boundary)
    sum += normal_derivative(u, b, k) * sample(w, b.site) - normal_derivative(w, b, k) * sample(u, b.site);
  return sum;
}

FeatureSet enumerate_features(const Obstacle& obstacle) {
  FeatureSet fs;

  for (Site v : obstacle.nodes()) {
    std::array<bool, 4> occ{};
    int nb = 0;
    for (int i = 0; i < 4; ++i) {
      occ[i] = obstacle.contains(v + kAxisSteps[i]);
      nb += occ[i];
    }
    // kAxisSteps is E, W, N, S.
    bool horizontal = occ[0] || occ[1];
    bool vertical = occ[2] || occ[3];
    if (nb <= 1)
      fs.features.push_back({v, FeatureKind::endpoint});
    else if (nb == 2 && horizontal && vertical)
      fs.features.push_back({v, FeatureKind::convex_corner});
  }

  // Coefficients of (Delta + k^2)[H2 u] at exterior sites next to the
  // obstacle, in terms of u on exterior sites, using u = 0 and H2 u = 0 on
  // the obstacle and (Delta + k^2) u = 0 off it. The k-dependent parts cancel.
  auto lu = [&](Site o, std::map<Site, double>& d, double scale) {
    for (Site e : kAxisSteps)
      if (!obstacle.contains(o + e)) d[o + e] += scale;
  };
  std::vector<Site> candidates;
  {
    std::unordered_set<Site, SiteHash> seen;
    for (Site o : obstacle.nodes())
      for (int dm = -2; dm <= 2; ++dm)
        for (int dn = -2; dn <= 2; ++dn) {
          Site p = o + Site{dm, dn};
          if (!obstacle.contains(p) && seen.insert(p).second) candidates.push_back(p);
        }
    std::sort(candidates.begin(), candidates.end());
  }
  std::map<Site, int> column;
  for (Site p : candidates) {
    std::map<Site, double> d;
    for (Site e : {kEast, kWest})
      if (obstacle.contains(p + e)) lu(p + e, d, 1.0);
    for (Site e : kAxisSteps) {
      Site o = p + e;
      if (!obstacle.contains(o)) continue;
      for (Site ee : {kEast, kWest})
        if (!obstacle.contains(o + ee)) d[o + ee] -= 1.0;
    }
    DefectSite ds{p, {}};
    for (auto [s, c] : d)
      if (c != 0.0) {
        ds.coefficients.emplace_back(s, c);
        column.emplace(s, 0);
      }
    if (!ds.coefficients.empty()) {
      fs.defect_sites.push_back(p);
      fs.defects.push_back(std::move(ds));
    }
  }
  int col = 0;
  for (auto& [s, idx] : column) idx = col++;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fs.defects.size()), col);
  for (std::size_t r = 0; r < fs.defects.size(); ++r)
    for (auto [s, c] : fs.defects[r].coefficients) a(static_cast<Eigen::Index>(r), column[s]) = c;
  if (a.size() > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu_dec(a);
    lu_dec.setThreshold(1e-9);
    fs.count_N = static_cast<int>(lu_dec.rank());
  }
  return fs;
}

}  // namespace latdiff
