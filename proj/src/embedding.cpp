#include "latdiff/embedding.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "latdiff/errors.hpp"
#include "latdiff/parallel.hpp"

namespace latdiff {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFactorFloor = 1e-6;

// Golden-ratio jitter in [-0.1, 0.1), used to break symmetric placements.
double jitter(int j) {
  double f = std::fmod((j + 1) * 0.6180339887498949, 1.0);
  return 0.2 * f - 0.1;
}

}  // namespace

Complex modified_factor(const WaveRoots& obs, const WaveRoots& inc) {
  return obs.s + 1.0 / obs.s - inc.s - 1.0 / inc.s;
}

Complex modified_factor(const Direction& obs, const Direction& inc, const Wavenumber& k) {
  return modified_factor(solve_dispersion(obs, k), solve_dispersion(inc, k));
}

Complex modified_directivity(Complex S, const Direction& beta, const Direction& beta_in, const Wavenumber& k) {
  return modified_factor(beta, beta_in, k) * S;
}

std::vector<Direction> normalize_observations(std::vector<Direction> obs) {
  std::stable_sort(obs.begin(), obs.end(), [](const Direction& a, const Direction& b) { return a.angle() < b.angle(); });
  std::vector<Direction> out;
  for (const auto& d : obs)
    if (out.empty() || !out.back().same_ray(d)) out.push_back(d);
  if (out.size() > 1 && out.back().same_ray(out.front())) out.pop_back();
  return out;
}

std::vector<Direction> angle_grid(int count, double from, double to) {
  if (count < 1) throw InputError("observation count must be at least 1");
  std::vector<Direction> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) out.push_back(Direction::from_angle(from + j * (to - from) / count));
  return out;
}

DirectivityTable directivity_table(const std::vector<ScatteringSolution>& solutions,
                                   const std::vector<Direction>& observations, int threads) {
  if (solutions.empty()) throw InputError("directivity table needs at least one solution");
  DirectivityTable t;
  t.observations = observations;
  t.obstacle = solutions.front().obstacle().name();
  const auto ni = static_cast<Eigen::Index>(observations.size());
  const auto nj = static_cast<Eigen::Index>(solutions.size());
  t.values.resize(ni, nj);
  t.modified.resize(ni, nj);
  t.flagged.assign(observations.size(), std::vector<bool>(solutions.size(), false));
  for (const auto& s : solutions) {
    if (!s.incidence.roots) throw InputError("directivity tables need plane-wave incidences");
    t.incidences.push_back(s.incidence.roots->direction);
  }
  const Wavenumber& k = solutions.front().k();
  std::vector<WaveRoots> obs_roots(observations.size());
  parallel_for(observations.size(), threads, [&](std::size_t i) { obs_roots[i] = solve_dispersion(observations[i], k); });
  parallel_for(observations.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < solutions.size(); ++j) {
      Complex S = directivity(solutions[j], obs_roots[i]);
      Complex f = modified_factor(obs_roots[i], *solutions[j].incidence.roots);
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = S;
      t.modified(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f * S;
      t.flagged[i][j] = std::abs(f) < kFactorFloor;
    }
  });
  return t;
}

EmbeddingBasis build_basis(std::shared_ptr<const BoundaryOperator> op, const std::vector<Direction>& betas,
                           const BasisOptions& options) {
  if (betas.empty()) throw ConfigError("embedding basis is empty");
  for (std::size_t a = 0; a < betas.size(); ++a)
    for (std::size_t b = a + 1; b < betas.size(); ++b)
      if (betas[a].same_ray(betas[b]))
        throw ConfigError("embedding basis repeats incidence " + betas[a].str());

  EmbeddingBasis basis;
  basis.op = op;
  basis.betas = betas;
  basis.count_N = enumerate_features(op->obstacle()).count_N;
  if (static_cast<int>(betas.size()) != basis.count_N) {
    std::string msg = "basis has " + std::to_string(betas.size()) + " members but obstacle '" +
                      op->obstacle().name() + "' needs " + std::to_string(basis.count_N);
    if (!options.allow_count_mismatch) throw ConfigError(msg);
    basis.warnings.push_back(msg);
  }

  const Wavenumber& k = op->k();
  const std::size_t n = betas.size();
  basis.roots.resize(n);
  basis.solutions.resize(n);
  parallel_for(n, options.threads, [&](std::size_t l) {
    basis.roots[l] = solve_dispersion(betas[l], k);
    basis.solutions[l] = solve_scattering(op, Incidence::plane(basis.roots[l]));
  });
  for (const auto& r : basis.roots) basis.s_roots.push_back(r.s);

  const auto N = static_cast<Eigen::Index>(n);
  basis.smod.resize(N, N);
  for (Eigen::Index p = 0; p < N; ++p)
    for (Eigen::Index l = 0; l < N; ++l) {
      const auto& rp = basis.roots[static_cast<std::size_t>(p)];
      const auto& rl = basis.roots[static_cast<std::size_t>(l)];
      basis.smod(p, l) = modified_factor(rp, rl) * directivity(basis.solutions[static_cast<std::size_t>(l)], rp);
    }

  double scale = basis.smod.cwiseAbs().maxCoeff();
  double asym = (basis.smod + basis.smod.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-6 * scale)
    throw NumericalError("modified directivity matrix of obstacle '" + op->obstacle().name() +
                         "' is not antisymmetric (defect " + std::to_string(asym / scale) + ")");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(basis.smod);
  const auto& sv = svd.singularValues();
  basis.condition = sv(N - 1) > 0 ? sv(0) / sv(N - 1) : std::numeric_limits<double>::infinity();
  return basis;
}

EmbeddingBasis build_basis(const Obstacle& obstacle, const std::vector<Direction>& betas, const Wavenumber& k,
                           const BasisOptions& options) {
  auto op = std::make_shared<BoundaryOperator>(obstacle, std::make_shared<GreenTable>(k), options.threads);
  return build_basis(op, betas, options);
}

std::vector<Direction> default_basis(int count) {
  if (count < 1) throw InputError("basis size must be positive");
  std::vector<Direction> out;
  for (int l = 0; l < count; ++l) {
    double theta = 0.5 * kPi * (l + 0.5 + jitter(l)) / count;
    out.push_back(Direction::from_beta(1.0 / std::tan(theta)));
  }
  return out;
}

std::vector<Direction> default_probes(int count) {
  if (count < 1) throw InputError("probe count must be positive");
  std::vector<Direction> out;
  for (int j = 0; j < count; ++j) {
    double theta = kPi * (j + 0.5 + jitter(j)) / count;
    out.push_back(Direction::from_angle(theta));
  }
  return out;
}

Eigen::VectorXcd solve_coefficients(const EmbeddingBasis& basis, const Eigen::VectorXcd& rhs) {
  if (rhs.size() != basis.smod.rows()) throw InputError("coefficient right-hand side has the wrong length");
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(basis.smod);
  double rc = lu.rcond();
  if (!(rc > 1e-15))
    throw NumericalError("embedding basis for obstacle '" + basis.op->obstacle().name() +
                         "' gives a singular coefficient system");
  return lu.solve(rhs);
}

Eigen::VectorXcd solve_coefficients(const EmbeddingBasis& basis, const Direction& beta_in) {
  WaveRoots rin = solve_dispersion(beta_in, basis.k());
  const auto N = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXcd rhs(N);
  for (Eigen::Index p = 0; p < N; ++p) {
    const auto pp = static_cast<std::size_t>(p);
    // S(beta_in, beta_p): observe solution p in the incidence direction.
    rhs(p) = -modified_factor(rin, basis.roots[pp]) * directivity(basis.solutions[pp], rin);
  }
  return solve_coefficients(basis, rhs);
}

EmbeddedDirectivity embed_directivity(const EmbeddingBasis& basis, const Eigen::VectorXcd& A,
                                      const DirectivityTable& aux, const Direction& beta_in) {
  const auto N = static_cast<Eigen::Index>(basis.size());
  if (A.size() != N) throw InputError("coefficient vector does not match the basis");
  if (aux.values.cols() != N || aux.incidences.size() != basis.size())
    throw InputError("auxiliary table does not cover every basis incidence");
  for (std::size_t l = 0; l < basis.size(); ++l)
    if (!aux.incidences[l].same_ray(basis.betas[l]))
      throw InputError("auxiliary table column " + std::to_string(l) + " is not basis incidence " +
                       basis.betas[l].str());

  const Wavenumber& k = basis.k();
  WaveRoots rin = solve_dispersion(beta_in, k);
  EmbeddedDirectivity e;
  e.observations = aux.observations;
  const std::size_t M = aux.observations.size();
  e.modified.resize(M);
  e.values.resize(M);
  e.flagged.assign(M, false);
  for (std::size_t i = 0; i < M; ++i) {
    WaveRoots ro = solve_dispersion(aux.observations[i], k);
    Complex sm = 0.0;
    for (Eigen::Index l = 0; l < N; ++l)
      sm += A(l) * modified_factor(ro, basis.roots[static_cast<std::size_t>(l)]) *
            aux.values(static_cast<Eigen::Index>(i), l);
    e.modified[i] = sm;
    Complex f = modified_factor(ro, rin);
    if (std::abs(f) < kFactorFloor) e.flagged[i] = true;
    else e.values[i] = sm / f;
  }
  // Flagged points take the value interpolated from their unflagged grid
  // neighbours, or extrapolated from one side at the ends.
  auto ok = [&](long j) { return j >= 0 && j < static_cast<long>(M) && !e.flagged[static_cast<std::size_t>(j)]; };
  for (long i = 0; i < static_cast<long>(M); ++i) {
    if (!e.flagged[static_cast<std::size_t>(i)]) continue;
    long lo = i - 1, hi = i + 1;
    while (lo >= 0 && !ok(lo)) --lo;
    while (hi < static_cast<long>(M) && !ok(hi)) ++hi;
    Complex v = 0.0;
    if (ok(lo) && ok(hi)) {
      double t = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
      v = (1.0 - t) * e.values[static_cast<std::size_t>(lo)] + t * e.values[static_cast<std::size_t>(hi)];
    } else {
      long a = ok(lo) ? lo : hi;
      long b = ok(lo) ? lo - 1 : hi + 1;
      while (b >= 0 && b < static_cast<long>(M) && !ok(b)) b += (b < a ? -1 : 1);
      if (ok(a) && ok(b)) {
        double t = static_cast<double>(i - a) / static_cast<double>(a - b);
        v = e.values[static_cast<std::size_t>(a)] +
            t * (e.values[static_cast<std::size_t>(a)] - e.values[static_cast<std::size_t>(b)]);
      } else if (ok(a)) {
        v = e.values[static_cast<std::size_t>(a)];
      }
    }
    e.values[static_cast<std::size_t>(i)] = v;
  }
  return e;
}

RankResult rank_probe(const Eigen::MatrixXcd& smod, double threshold) {
  if (smod.rows() < 1 || smod.rows() != smod.cols()) throw InputError("rank probe needs a non-empty square matrix");
  if (!(threshold > 0)) throw InputError("rank threshold must be positive");
  if (!smod.allFinite()) throw NumericalError("rank probe matrix has non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(smod);
  RankResult r;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    double s = svd.singularValues()(i);
    r.singular_values.push_back(s);
    if (s > threshold) ++r.rank;
  }
  return r;
}

Eigen::MatrixXcd modified_matrix(std::shared_ptr<const BoundaryOperator> op, const std::vector<Direction>& probes,
                                 int threads) {
  const std::size_t M = probes.size();
  std::vector<WaveRoots> roots(M);
  std::vector<ScatteringSolution> sols(M);
  parallel_for(M, threads, [&](std::size_t l) {
    roots[l] = solve_dispersion(probes[l], op->k());
    sols[l] = solve_scattering(op, Incidence::plane(roots[l]));
  });
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  for (std::size_t p = 0; p < M; ++p)
    for (std::size_t l = 0; l < M; ++l)
      out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(l)) =
          modified_factor(roots[p], roots[l]) * directivity(sols[l], roots[p]);
  return out;
}

WeakEmbeddingCheck weak_embedding_field_check(const EmbeddingBasis& basis, const Eigen::VectorXcd& A,
                                              const ScatteringSolution& incident, const std::vector<Site>& sites) {
  if (!incident.incidence.roots) throw InputError("weak embedding check needs a plane-wave incidence");
  if (A.size() != static_cast<Eigen::Index>(basis.size())) throw InputError("coefficient vector does not match the basis");
  const Obstacle& obs = basis.op->obstacle();
  auto total = [](const ScatteringSolution& s) -> FieldSampler {
    return [&s](Site site) -> std::optional<Complex> { return total_field(s, site); };
  };
  WeakEmbeddingCheck out;
  for (Site p : sites) {
    if (obs.contains(p)) throw DomainError("weak embedding sample site lies on the obstacle");
    Complex r = apply_embedding_operator(total(incident), p, incident.incidence.roots->s, EmbeddingOrder::H2);
    for (std::size_t l = 0; l < basis.size(); ++l)
      r -= A(static_cast<Eigen::Index>(l)) *
           apply_embedding_operator(total(basis.solutions[l]), p, basis.s_roots[l], EmbeddingOrder::H2);
    out.max_residual = std::max(out.max_residual, std::abs(r));
    for (int dm = -1; dm <= 1; ++dm) {
      Site t = p + Site{dm, 0};
      if (!obs.contains(t)) out.field_scale = std::max(out.field_scale, std::abs(reconstruct_field(incident, t)));
    }
  }
  return out;
}

std::vector<Site> random_exterior_sites(const Obstacle& obstacle, int count, int pad, std::uint64_t seed) {
  Site lo = obstacle.bbox_min() - Site{pad, pad}, hi = obstacle.bbox_max() + Site{pad, pad};
  long available = static_cast<long>(hi.m - lo.m + 1) * (hi.n - lo.n + 1) - static_cast<long>(obstacle.size());
  if (count > available) throw InputError("not enough exterior sites for the requested sample");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dm(lo.m, hi.m), dn(lo.n, hi.n);
  std::set<Site> picked;
  std::vector<Site> out;
  while (static_cast<int>(out.size()) < count) {
    Site s{dm(rng), dn(rng)};
    if (obstacle.contains(s) || !picked.insert(s).second) continue;
    out.push_back(s);
  }
  return out;
}

}  // namespace latdiff
