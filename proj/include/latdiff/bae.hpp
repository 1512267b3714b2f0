#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "latdiff/geometry.hpp"
#include "latdiff/green.hpp"

namespace latdiff {

// Incident field u^in. Plane waves keep their roots; any other field that
// solves the Helmholtz equation near the obstacle (a point source, say) is
// given by its sampler.
struct Incidence {
  std::function<Complex(Site)> field;
  std::optional<WaveRoots> roots;
  Complex amplitude = 1.0;
  std::string label;

  static Incidence plane(const WaveRoots& roots, Complex amplitude = 1.0);
  // amplitude * G(site - source)
  static Incidence point_source(Site source, std::shared_ptr<const GreenTable> table, Complex amplitude = 1.0);

  Complex operator()(Site s) const { return field(s); }
};

// K_{mu nu} = G(mu - nu) over the boundary nodes, factorised once, plus the
// matrix D_{mu nu} = d_nu[G(. - mu)] used by the right-hand side. One object
// serves any number of incident fields.
class BoundaryOperator {
 public:
  BoundaryOperator(const Obstacle& obstacle, std::shared_ptr<const GreenTable> table, int threads = 0);

  const Obstacle& obstacle() const { return obstacle_; }
  const std::vector<BoundaryNode>& boundary() const { return boundary_; }
  const std::vector<std::vector<std::pair<Site, Complex>>>& stencils() const { return stencils_; }
  const GreenTable& green() const { return *table_; }
  std::shared_ptr<const GreenTable> green_ptr() const { return table_; }
  const Wavenumber& k() const { return table_->k(); }
  const Eigen::MatrixXcd& K() const { return K_; }
  const Eigen::MatrixXcd& D() const { return D_; }
  double condition_estimate() const { return condition_; }
  std::size_t size() const { return boundary_.size(); }
  std::optional<std::size_t> index_of(Site s) const;
  int threads() const { return threads_; }

  Eigen::VectorXcd rhs(const Eigen::VectorXcd& incident_trace) const { return -(D_ * incident_trace); }
  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const { return lu_.solve(rhs); }

 private:
  Obstacle obstacle_;
  std::shared_ptr<const GreenTable> table_;
  std::vector<BoundaryNode> boundary_;
  std::vector<std::vector<std::pair<Site, Complex>>> stencils_;
  std::unordered_map<Site, std::size_t, SiteHash> index_;
  Eigen::MatrixXcd K_, D_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double condition_ = 0.0;
  int threads_ = 1;
};

struct ScatteringSolution {
  std::shared_ptr<const BoundaryOperator> op;
  Incidence incidence;
  Eigen::VectorXcd incident_trace;  // u^in on the boundary nodes
  Eigen::VectorXcd densities;       // d_nu[u^sc] on the boundary nodes
  double condition_estimate = 0.0;
  double residual = 0.0;  // |K x - F| / |F|

  const Obstacle& obstacle() const { return op->obstacle(); }
  const Wavenumber& k() const { return op->k(); }
};

ScatteringSolution solve_scattering(std::shared_ptr<const BoundaryOperator> op, const Incidence& incidence);

ScatteringSolution assemble_and_solve(const Obstacle& obstacle, const Incidence& incidence, const Wavenumber& k,
                                      int threads = 0);

// u^sc at an exterior site. On boundary nodes the Dirichlet trace -u^in is
// returned; deeper obstacle sites are a domain error.
Complex reconstruct_field(const ScatteringSolution& solution, Site site);

// u^in + u^sc off the obstacle, 0 on it.
Complex total_field(const ScatteringSolution& solution, Site site);

// Far-field coefficient S with u^sc ~ g(m, n) S along the direction.
Complex directivity(const ScatteringSolution& solution, const Direction& direction);
Complex directivity(const ScatteringSolution& solution, const WaveRoots& observation);

// Brute-force oracle on a finite box: (Delta + k^2) u = f with Dirichlet data.
struct GridBox {
  int m0, m1, n0, n1;
  bool contains(Site s) const { return s.m >= m0 && s.m <= m1 && s.n >= n0 && s.n <= n1; }
  bool on_rim(Site s) const { return s.m == m0 || s.m == m1 || s.n == n0 || s.n == n1; }
};

class FieldGrid {
 public:
  FieldGrid(GridBox box, std::vector<Complex> values) : box_(box), values_(std::move(values)) {}
  const GridBox& box() const { return box_; }
  std::optional<Complex> at(Site s) const;
  Complex operator()(Site s) const;  // DomainError outside the box

 private:
  GridBox box_;
  std::vector<Complex> values_;
};

// Sparse direct solve. The rim is held at zero, `dirichlet` fixes other
// sites, `source` is the right-hand side elsewhere (may be empty).
FieldGrid solve_on_box(const GridBox& box, const std::function<std::optional<Complex>(Site)>& dirichlet,
                       const std::function<Complex(Site)>& source, const Wavenumber& k);

// u^sc on the square box of half-width box_radius centred on the obstacle,
// with u^sc = -u^in on the obstacle. The margin between obstacle and rim must
// be at least 5 / Im k.
FieldGrid oracle_grid_solve(const Obstacle& obstacle, const Incidence& incidence, const Wavenumber& k,
                            int box_radius);

}  // namespace latdiff
