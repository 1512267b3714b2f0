#pragma once

#include <istream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "latdiff/lattice.hpp"

namespace latdiff {

// Finite set of Dirichlet nodes. Nodes are kept sorted; components use
// 4-adjacency, so obstacles touching only diagonally are separate.
class Obstacle {
 public:
  explicit Obstacle(std::vector<Site> nodes, std::string name = "obstacle");

  // "m n" per line, '#' starts a comment. Duplicates and empty input are errors.
  static Obstacle parse(std::istream& in, std::string name = "obstacle");
  static Obstacle load(const std::string& path);

  const std::vector<Site>& nodes() const { return nodes_; }
  const std::vector<std::vector<Site>>& components() const { return components_; }
  const std::string& name() const { return name_; }
  bool contains(Site s) const { return lookup_.count(s) != 0; }
  std::size_t size() const { return nodes_.size(); }
  Site bbox_min() const { return lo_; }
  Site bbox_max() const { return hi_; }

 private:
  std::vector<Site> nodes_;
  std::unordered_set<Site, SiteHash> lookup_;
  std::vector<std::vector<Site>> components_;
  std::string name_;
  Site lo_, hi_;
};

// Handy shapes.
Obstacle rectangle(int m0, int n0, int width, int height, std::string name = "rectangle");
Obstacle right_angle(int arm, std::string name = "right_angle");  // {(m,0)} u {(0,n)}, 0..arm-1

enum class BoundaryKind { straight, external_right_angle, internal_right_angle, degenerate };

const char* to_string(BoundaryKind kind);

// A node of the discrete boundary. The normal derivative is a sum over the
// unit cells around the node that are not entirely inside the obstacle: each
// such cell adds (k^2/4 - 1) to the node and 1/2 to the two cell neighbours
// of the node. That gives self weight 3, 2 or 1 units for convex corners,
// straight runs and concave corners, weight 1 for exterior neighbours and
// 1/2 for neighbours along the boundary.
struct BoundaryNode {
  Site site;
  BoundaryKind kind = BoundaryKind::straight;
  int exterior_cells = 0;  // self weight in units of (k^2/4 - 1)
  std::vector<Site> boundary_neighbors;
  std::vector<Site> exterior_neighbors;
  std::vector<std::pair<Site, double>> neighbor_weights;  // sorted by site, self excluded

  // Full stencil including the self weight, sorted by site.
  std::vector<std::pair<Site, Complex>> weights(const Wavenumber& k) const;
};

// Obstacle nodes that are a corner of at least one unit cell not entirely
// inside the obstacle, sorted by site.
std::vector<BoundaryNode> classify_boundary(const Obstacle& obstacle);

Complex normal_derivative(const FieldSampler& values, const BoundaryNode& node, const Wavenumber& k);

// Boundary bilinear sum of Green's identity: sum over nodes of
// (d_nu[u] w - d_nu[w] u). Vanishes for two exterior Helmholtz solutions.
Complex green_identity_sum(const std::vector<BoundaryNode>& boundary, const FieldSampler& u,
                           const FieldSampler& w, const Wavenumber& k);

enum class FeatureKind { endpoint, convex_corner };

const char* to_string(FeatureKind kind);

struct Feature {
  Site site;
  FeatureKind kind;
};

// Defect of the H2 embedding at one exterior site: the coefficients, on the
// total field u, of (Delta + k^2)[H2 u] there with u and H2 u set to zero on
// the obstacle.
struct DefectSite {
  Site site;
  std::vector<std::pair<Site, double>> coefficients;
};

struct FeatureSet {
  std::vector<Feature> features;
  std::vector<DefectSite> defects;
  std::vector<Site> defect_sites;
  // Number of independent defect strengths: the rank of the defect
  // coefficient matrix. This is the number of auxiliary solutions needed.
  int count_N = 0;
};

FeatureSet enumerate_features(const Obstacle& obstacle);

}  // namespace latdiff
