#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "latdiff/bae.hpp"

namespace latdiff {

// s_obs + 1/s_obs - s_in - 1/s_in, zero when obs and inc share s + 1/s.
Complex modified_factor(const WaveRoots& obs, const WaveRoots& inc);
Complex modified_factor(const Direction& obs, const Direction& inc, const Wavenumber& k);

// Modified directivity S~(beta, beta_in) = factor * S.
Complex modified_directivity(Complex S, const Direction& beta, const Direction& beta_in, const Wavenumber& k);

// Sorted by angle in [0, 2pi), rays closer than 1e-12 merged.
std::vector<Direction> normalize_observations(std::vector<Direction> observations);

// count directions at angles from + j (to - from) / count.
std::vector<Direction> angle_grid(int count, double from, double to);

struct DirectivityTable {
  std::vector<Direction> observations;
  std::vector<Direction> incidences;
  Eigen::MatrixXcd values;    // S(observation i, incidence j)
  Eigen::MatrixXcd modified;  // S~(observation i, incidence j)
  std::vector<std::vector<bool>> flagged;  // |factor| < 1e-6 at (i, j)
  std::string obstacle;
};

// Directivities of already solved problems at the given observations.
DirectivityTable directivity_table(const std::vector<ScatteringSolution>& solutions,
                                   const std::vector<Direction>& observations, int threads = 0);

struct BasisOptions {
  bool allow_count_mismatch = false;
  int threads = 0;
};

struct EmbeddingBasis {
  std::shared_ptr<const BoundaryOperator> op;
  std::vector<Direction> betas;
  std::vector<WaveRoots> roots;
  std::vector<Complex> s_roots;
  std::vector<ScatteringSolution> solutions;
  Eigen::MatrixXcd smod;  // S~(beta_p, beta_l)
  int count_N = 0;
  double condition = 0.0;  // 2-norm condition of smod
  std::vector<std::string> warnings;

  const Wavenumber& k() const { return op->k(); }
  std::size_t size() const { return betas.size(); }
};

EmbeddingBasis build_basis(std::shared_ptr<const BoundaryOperator> op, const std::vector<Direction>& betas,
                           const BasisOptions& options = {});
EmbeddingBasis build_basis(const Obstacle& obstacle, const std::vector<Direction>& betas, const Wavenumber& k,
                           const BasisOptions& options = {});

// Cotangents of perturbed equispaced angles in (0, pi/2).
std::vector<Direction> default_basis(int count);

// -S~(beta_in, beta_p) = sum_l A_l S~(beta_p, beta_l), with S~(beta_in, beta_p)
// taken from the auxiliary solutions by reciprocity.
Eigen::VectorXcd solve_coefficients(const EmbeddingBasis& basis, const Direction& beta_in);
// Same system for a measured right-hand side rhs_p = -S~(beta_in, beta_p).
Eigen::VectorXcd solve_coefficients(const EmbeddingBasis& basis, const Eigen::VectorXcd& rhs);

struct EmbeddedDirectivity {
  std::vector<Direction> observations;
  std::vector<Complex> modified;  // S~(beta, beta_in)
  std::vector<Complex> values;    // recovered S
  std::vector<bool> flagged;      // factor below 1e-6, S interpolated
};

// Auxiliary table must hold S(obs, beta_l) for every basis member, in order.
EmbeddedDirectivity embed_directivity(const EmbeddingBasis& basis, const Eigen::VectorXcd& A,
                                      const DirectivityTable& auxiliary, const Direction& beta_in);

struct RankResult {
  int rank = 0;
  std::vector<double> singular_values;  // non-increasing
};

// Number of singular values above an absolute threshold.
RankResult rank_probe(const Eigen::MatrixXcd& smod, double threshold = 5e-5);

// S~(probe_m, probe_l) from one solve per probe.
Eigen::MatrixXcd modified_matrix(std::shared_ptr<const BoundaryOperator> op, const std::vector<Direction>& probes,
                                 int threads = 0);

// Probe incidences for an M x M rank test: perturbed equispaced angles in (0, pi).
std::vector<Direction> default_probes(int count);

struct WeakEmbeddingCheck {
  double max_residual = 0.0;
  double field_scale = 0.0;  // max |u^sc| for beta_in over the samples and their stencils
};

// H2[u] - sum_l A_l H2[u_l] on total fields, each with its own s, at the sites.
WeakEmbeddingCheck weak_embedding_field_check(const EmbeddingBasis& basis, const Eigen::VectorXcd& A,
                                              const ScatteringSolution& incident, const std::vector<Site>& sites);

// Distinct exterior sites drawn uniformly from the obstacle box grown by `pad`.
std::vector<Site> random_exterior_sites(const Obstacle& obstacle, int count, int pad, std::uint64_t seed);

}  // namespace latdiff
