#include "latdiff/bae.hpp"

#include <cmath>

#include "latdiff/errors.hpp"
#include "latdiff/parallel.hpp"

namespace latdiff {

Incidence Incidence::plane(const WaveRoots& roots, Complex amplitude) {
  Incidence inc;
  inc.roots = roots;
  inc.amplitude = amplitude;
  inc.label = "plane wave " + roots.direction.str();
  inc.field = [roots, amplitude](Site s) { return amplitude * plane_wave(roots, s, -1); };
  return inc;
}

Incidence Incidence::point_source(Site source, std::shared_ptr<const GreenTable> table, Complex amplitude) {
  Incidence inc;
  inc.amplitude = amplitude;
  inc.label = "point source (" + std::to_string(source.m) + "," + std::to_string(source.n) + ")";
  inc.field = [source, table, amplitude](Site s) { return amplitude * table->value(s - source); };
  return inc;
}

BoundaryOperator::BoundaryOperator(const Obstacle& obstacle, std::shared_ptr<const GreenTable> table, int threads)
    : obstacle_(obstacle), table_(std::move(table)), threads_(threads <= 0 ? default_threads() : threads) {
  if (!table_) throw InputError("boundary operator needs a Green table");
  boundary_ = classify_boundary(obstacle_);
  const auto n = static_cast<Eigen::Index>(boundary_.size());
  if (n == 0) throw DomainError("obstacle '" + obstacle_.name() + "' has no boundary nodes");
  const Wavenumber& k = table_->k();
  stencils_.reserve(boundary_.size());
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    stencils_.push_back(boundary_[i].weights(k));
    index_.emplace(boundary_[i].site, i);
  }

  std::vector<Site> needed;
  for (const auto& mu : boundary_)
    for (const auto& st : stencils_)
      for (const auto& [rho, w] : st) needed.push_back(rho - mu.site);
  table_->prefetch(needed, threads_);

  K_.resize(n, n);
  D_.resize(n, n);
  parallel_for(boundary_.size(), threads_, [&](std::size_t r) {
    const Site mu = boundary_[r].site;
    const auto i = static_cast<Eigen::Index>(r);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& nu = boundary_[static_cast<std::size_t>(j)];
      K_(i, j) = table_->value(mu - nu.site);
      Complex d = 0.0;
      for (const auto& [rho, w] : stencils_[static_cast<std::size_t>(j)]) d += w * table_->value(rho - mu);
      D_(i, j) = d;
    }
  });

  lu_.compute(K_);
  double rc = lu_.rcond();
  condition_ = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(condition_ <= 1e12))
    throw NumericalError("boundary system for obstacle '" + obstacle_.name() + "' is ill-conditioned (estimate " +
                         std::to_string(condition_) + ")");
}

std::optional<std::size_t> BoundaryOperator::index_of(Site s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ScatteringSolution solve_scattering(std::shared_ptr<const BoundaryOperator> op, const Incidence& incidence) {
  ScatteringSolution sol;
  sol.op = op;
  sol.incidence = incidence;
  const auto n = static_cast<Eigen::Index>(op->size());
  sol.incident_trace.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) sol.incident_trace(i) = incidence(op->boundary()[static_cast<std::size_t>(i)].site);
  Eigen::VectorXcd F = op->rhs(sol.incident_trace);
  sol.densities = op->solve(F);
  sol.condition_estimate = op->condition_estimate();
  double fn = F.norm();
  sol.residual = fn > 0 ? (op->K() * sol.densities - F).norm() / fn : sol.densities.norm();
  if (!(sol.residual <= 1e-10))
    throw NumericalError("boundary solve residual " + std::to_string(sol.residual) + " for obstacle '" +
                         op->obstacle().name() + "'");
  return sol;
}

ScatteringSolution assemble_and_solve(const Obstacle& obstacle, const Incidence& incidence, const Wavenumber& k,
                                      int threads) {
  auto table = std::make_shared<GreenTable>(k);
  auto op = std::make_shared<BoundaryOperator>(obstacle, table, threads);
  return solve_scattering(op, incidence);
}

Complex reconstruct_field(const ScatteringSolution& sol, Site mu) {
  const auto& op = *sol.op;
  if (op.obstacle().contains(mu)) {
    if (auto idx = op.index_of(mu)) return -sol.incident_trace(static_cast<Eigen::Index>(*idx));
    throw DomainError("site (" + std::to_string(mu.m) + "," + std::to_string(mu.n) + ") lies inside obstacle '" +
                      op.obstacle().name() + "'");
  }
  const GreenTable& g = op.green();
  Complex u = 0.0;
  for (std::size_t j = 0; j < op.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    Complex d = 0.0;
    for (const auto& [rho, w] : op.stencils()[j]) d += w * g.value(rho - mu);
    u += sol.densities(jj) * g.value(mu - op.boundary()[j].site) + d * sol.incident_trace(jj);
  }
  return u;
}

Complex total_field(const ScatteringSolution& sol, Site site) {
  if (sol.obstacle().contains(site)) return 0.0;
  return sol.incidence(site) + reconstruct_field(sol, site);
}

Complex directivity(const ScatteringSolution& sol, const WaveRoots& obs) {
  const auto& op = *sol.op;
  Complex S = 0.0;
  for (std::size_t j = 0; j < op.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    Complex d = 0.0;
    for (const auto& [rho, w] : op.stencils()[j]) d += w * plane_wave(obs, rho, -1);
    S += sol.densities(jj) * plane_wave(obs, op.boundary()[j].site, -1) + d * sol.incident_trace(jj);
  }
  return S;
}

Complex directivity(const ScatteringSolution& sol, const Direction& direction) {
  return directivity(sol, solve_dispersion(direction, sol.k()));
}

}  // namespace latdiff
