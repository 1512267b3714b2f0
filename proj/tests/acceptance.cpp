#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "app.hpp"
#include "latdiff/bae.hpp"
#include "latdiff/canonical.hpp"
#include "latdiff/embedding.hpp"
#include "latdiff/geometry.hpp"
#include "latdiff/green.hpp"

using namespace latdiff;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::shared_ptr<BoundaryOperator> make_op(const Obstacle& o, const Wavenumber& k) {
  return std::make_shared<BoundaryOperator>(o, std::make_shared<GreenTable>(k), 1);
}

Incidence plane(const Direction& d, const Wavenumber& k) { return Incidence::plane(solve_dispersion(d, k)); }

std::vector<Direction> betas(std::initializer_list<double> values) {
  std::vector<Direction> out;
  for (double b : values) out.push_back(Direction::from_beta(b));
  return out;
}

Outcome green_delta() {
  Wavenumber k(0.6, 0.01);
  GreenTable g(k);
  FieldSampler G = [&](Site s) -> std::optional<Complex> { return g(s); };
  double worst = 0.0;
  for (int m = -30; m <= 30; ++m)
    for (int n = -30; n <= 30; ++n) {
      Site s{m, n};
      worst = std::max(worst, std::abs(helmholtz_residual(G, s, k) - (s == Site{0, 0} ? 1.0 : 0.0)));
    }
  return {worst <= 1e-10, "max residual " + fmt(worst)};
}

Outcome asymptotics() {
  Wavenumber k(0.6, 0.01);
  GreenTable g(k);
  bool pass = true;
  double worst = 0.0;
  for (Direction d : {Direction(1, 0), Direction(1, 1), Direction(0, 1), Direction(-1, 2), Direction(-1, 0),
                      Direction(-2, -1), Direction(0, -1), Direction(3, -1)}) {
    double err[2];
    int i = 0;
    for (double N : {100.0, 400.0}) {
      Site s{static_cast<int>(std::lround(N * d.m() / d.norm())), static_cast<int>(std::lround(N * d.n() / d.norm()))};
      err[i++] = std::abs(g(s) / green_asymptotic(s, k) - 1.0);
    }
    pass = pass && err[1] <= 0.02 && err[1] < err[0];
    worst = std::max(worst, err[1]);
  }
  return {pass, "worst N=400 error " + fmt(worst)};
}

Obstacle frame(int m0, int n0, int w, int h, int thickness) {
  std::vector<Site> nodes;
  for (int m = m0; m < m0 + w; ++m)
    for (int n = n0; n < n0 + h; ++n) {
      bool hole = m >= m0 + thickness && m < m0 + w - thickness && n >= n0 + thickness && n < n0 + h - thickness;
      if (!hole) nodes.push_back({m, n});
    }
  return Obstacle(nodes, "frame");
}

Outcome green_identity() {
  Wavenumber k(0.6, 0.1);
  GreenTable g(k);
  bool pass = true;
  double worst = 0.0;
  for (const Obstacle& o : {frame(0, 0, 13, 11, 3), frame(-4, 2, 16, 9, 3), frame(5, -7, 20, 14, 4)}) {
    auto boundary = classify_boundary(o);
    bool seen[3] = {false, false, false};
    for (const auto& b : boundary) {
      if (b.kind == BoundaryKind::straight) seen[0] = true;
      if (b.kind == BoundaryKind::external_right_angle) seen[1] = true;
      if (b.kind == BoundaryKind::internal_right_angle) seen[2] = true;
    }
    pass = pass && seen[0] && seen[1] && seen[2];
    // Sources in the solid ring lie outside the exterior domain.
    Site a = o.nodes().front() + Site{1, 1};
    Site c = o.nodes().back() - Site{1, 1};
    pass = pass && o.contains(a) && o.contains(c);
    FieldSampler u = [&](Site s) -> std::optional<Complex> { return g(s - a); };
    FieldSampler w = [&](Site s) -> std::optional<Complex> { return g(s - c); };
    double scale = 0.0;
    for (const auto& b : boundary) {
      scale += std::abs(normal_derivative(u, b, k) * w(b.site).value());
      scale += std::abs(normal_derivative(w, b, k) * u(b.site).value());
    }
    double rel = std::abs(green_identity_sum(boundary, u, w, k)) / scale;
    worst = std::max(worst, rel);
  }
  return {pass && worst <= 1e-10, "max relative sum " + fmt(worst)};
}

Outcome bae_vs_oracle() {
  Wavenumber k(0.6, 0.1);
  Obstacle o = rectangle(0, 0, 5, 5);
  Incidence inc = plane(Direction::from_beta(1.0), k);
  ScatteringSolution sol = assemble_and_solve(o, inc, k, 1);
  FieldGrid grid = oracle_grid_solve(o, inc, k, 150);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(-15, 19);
  double worst = 0.0;
  int used = 0;
  while (used < 100) {
    Site s{pick(rng), pick(rng)};
    if (o.contains(s)) continue;
    Complex a = reconstruct_field(sol, s), b = grid(s);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
    ++used;
  }
  return {worst <= 1e-6, "max relative deviation " + fmt(worst) + " at 100 sites"};
}

Outcome monopole() {
  Wavenumber k(0.6, 0.01);
  GreenTable g(k);
  auto op = make_op(Obstacle({{0, 0}}), k);
  ScatteringSolution sol = solve_scattering(op, plane(Direction(1, 2), k));
  Complex expected = -sol.incidence({0, 0}) / g({0, 0});
  double worst = 0.0;
  for (int j = 0; j < 50; ++j) {
    Direction d = Direction::from_angle(2.0 * std::numbers::pi * (j + 0.3) / 50.0);
    worst = std::max(worst, std::abs(directivity(sol, d) - expected) / std::abs(expected));
  }
  return {worst <= 1e-10, "max relative deviation " + fmt(worst)};
}

Outcome reciprocity() {
  Wavenumber k(0.6, 0.01);
  auto op = make_op(rectangle(0, 0, 21, 21), k);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0, scale = 0.0;
  for (int p = 0; p < 10; ++p) {
    Direction a = Direction::from_angle(angle(rng)), b = Direction::from_angle(angle(rng));
    Complex ab = directivity(solve_scattering(op, plane(b, k)), a);
    Complex ba = directivity(solve_scattering(op, plane(a, k)), b);
    worst = std::max(worst, std::abs(ab - ba));
    scale = std::max({scale, std::abs(ab), std::abs(ba)});
  }
  return {worst <= 1e-8 * scale, "max |S(b,b') - S(b',b)| / max|S| = " + fmt(worst / scale)};
}

Outcome embedding(const Obstacle& o, const std::vector<Direction>& basis_betas) {
  Wavenumber k(0.6, 0.01);
  EmbeddingBasis basis = build_basis(o, basis_betas, k);
  Direction beta_in = Direction::from_beta(1.0);
  auto obs = normalize_observations(angle_grid(100, 0.0, 2.0 * std::numbers::pi));
  Eigen::VectorXcd A = solve_coefficients(basis, beta_in);
  DirectivityTable aux = directivity_table(basis.solutions, obs, 1);
  EmbeddedDirectivity emb = embed_directivity(basis, A, aux, beta_in);
  ScatteringSolution direct = solve_scattering(basis.op, plane(beta_in, k));
  double worst = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (emb.flagged[i]) continue;
    Complex d = directivity(direct, obs[i]);
    worst = std::max(worst, std::abs(emb.values[i] - d) / std::abs(d));
    ++used;
  }
  return {worst <= 1e-6 && used >= 90 && basis.count_N == static_cast<int>(basis_betas.size()),
          "N=" + std::to_string(basis.count_N) + ", max relative deviation " + fmt(worst) + " over " +
              std::to_string(used) + " points"};
}

Outcome rank_recovery() {
  Wavenumber k(0.6, 0.01);
  std::string detail;
  bool pass = true;
  struct Case {
    const char* name;
    Obstacle obstacle;
    int expected;
  };
  for (const Case& c : {Case{"square", rectangle(0, 0, 21, 21), 8}, Case{"right angle", right_angle(21), 6},
                        Case{"single node", Obstacle({{0, 0}}), 2}}) {
    int N = enumerate_features(c.obstacle).count_N;
    pass = pass && N == c.expected;
    auto op = make_op(c.obstacle, k);
    detail += std::string(detail.empty() ? "" : "; ") + c.name + ":";
    for (int M = N; M <= N + 4; ++M) {
      int r = rank_probe(modified_matrix(op, default_probes(M), 1), 5e-5).rank;
      pass = pass && r == c.expected;
      detail += " " + std::to_string(r);
    }
  }
  return {pass, detail};
}

Outcome appendix_d() {
  double ident = 0.0, factor = 0.0;
  for (Complex kv : {Complex(0.6, 0.1), Complex(0.6, 0.01)}) {
    HalfPlaneConstants c = halfplane_constants(Wavenumber(kv));
    ident = std::max({ident, std::abs(c.eta_o1 * c.eta_i1 - 1.0), std::abs(c.eta_o2 * c.eta_i2 - 1.0),
                      std::abs(c.eta_o1 + c.eta_i1 + c.d1), std::abs(c.eta_o2 + c.eta_i2 + c.d2) / std::abs(c.d2)});
    for (int j = 0; j < 64; ++j) {
      Complex s = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / 64.0);
      KernelValues v = kernel_and_transforms(s, 1.0, c);
      factor = std::max(factor, std::abs(v.upsilon * v.v_minus - v.v_plus) / std::abs(v.v_plus));
    }
  }
  Wavenumber k(0.6, 0.1);
  TruncatedEdgeGreen e(401, k, 1);
  double edge = std::abs(e.value_at_source() * halfplane_constants(k).root_product - 1.0);
  return {ident <= 1e-14 && factor <= 1e-12 && edge <= 1e-6,
          "identities " + fmt(ident) + ", factorisation " + fmt(factor) + ", edge " + fmt(edge)};
}

Outcome operators() {
  Wavenumber k(0.6, 0.01);
  double annihilation = 0.0;
  for (int j = 0; j < 12; ++j) {
    WaveRoots w = solve_dispersion(Direction::from_angle(2.0 * std::numbers::pi * (j + 0.2) / 12.0), k);
    FieldSampler u = [&](Site s) -> std::optional<Complex> { return plane_wave(w, s, -1); };
    for (Site s : {Site{0, 0}, Site{3, -2}, Site{-7, 5}})
      for (EmbeddingOrder order : {EmbeddingOrder::H1, EmbeddingOrder::H2})
        annihilation = std::max(annihilation, std::abs(apply_embedding_operator(u, s, w.s, order)) / std::abs(u(s).value()));
  }
  Obstacle o = rectangle(0, 0, 21, 21);
  EmbeddingBasis basis = build_basis(o, betas({0.2769, 0.4710, 0.6994, 0.9900, 11.3999, 2.0691, 3.4763, 9.0542}), k);
  Direction beta_in = Direction::from_beta(1.0);
  Eigen::VectorXcd A = solve_coefficients(basis, beta_in);
  ScatteringSolution inc = solve_scattering(basis.op, plane(beta_in, k));
  WeakEmbeddingCheck w = weak_embedding_field_check(basis, A, inc, random_exterior_sites(o, 50, 8, 5));
  return {annihilation <= 1e-14 && w.max_residual <= 1e-8 * w.field_scale,
          "annihilation " + fmt(annihilation) + ", weak residual / scale " + fmt(w.max_residual / w.field_scale)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "latdiff");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  std::string tmpl = (fs::temp_directory_path() / "latdiff_accept_XXXXXX").string();
  if (!mkdtemp(tmpl.data())) return {false, "cannot create a temporary directory"};
  fs::path root = tmpl;
  std::string data = LATDIFF_DATA_DIR;
  bool pass = true;
  int compared = 0;
  for (const char* scen : {"square_directivity.json", "square_embed.json", "square_rank.json"}) {
    std::string path = data + "/" + scen;
    std::string cmd = std::string(scen) == "square_rank.json" ? "rank" : "run";
    fs::path a = root / "a", b = root / "b", c = root / "c";
    int rc = invoke({cmd, "--scenario", path, "--out", a.string(), "--threads", "1", "--no-svg"}) |
             invoke({cmd, "--scenario", path, "--out", b.string(), "--threads", "1", "--no-svg"}) |
             invoke({cmd, "--scenario", path, "--out", c.string(), "--threads", "8", "--no-svg"});
    pass = pass && rc == 0;
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      std::string x = slurp(e.path());
      pass = pass && x == slurp(b / e.path().filename()) && x == slurp(c / e.path().filename());
      ++compared;
    }
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  return {pass && compared >= 5, std::to_string(compared) + " CSV files compared"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget;  // seconds, 0 for none
  };
  std::vector<Criterion> criteria = {
      {"green_delta_residual", green_delta, 5.0},
      {"green_asymptotics", asymptotics, 0.0},
      {"green_identity_annuli", green_identity, 0.0},
      {"bae_vs_grid_oracle", bae_vs_oracle, 60.0},
      {"monopole_directivity", monopole, 0.0},
      {"reciprocity_square21", reciprocity, 0.0},
      {"square_embedding", [] {
         return embedding(rectangle(0, 0, 21, 21),
                          betas({0.2769, 0.4710, 0.6994, 0.9900, 11.3999, 2.0691, 3.4763, 9.0542}));
       }, 30.0},
      {"right_angle_embedding", [] {
         return embedding(right_angle(21), betas({0.3390, 0.6181, 0.9900, 1.5823, 2.8560, 9.0542}));
       }, 30.0},
      {"rank_recovery", rank_recovery, 0.0},
      {"halfplane_constants_and_edge", appendix_d, 0.0},
      {"embedding_operators", operators, 0.0},
      {"determinism", determinism, 0.0},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (criteria[i].budget > 0.0 && secs > criteria[i].budget) {
      o.pass = false;
      o.detail += ", over the " + fmt(criteria[i].budget) + " s budget";
    }
    failed += !o.pass;
    std::printf("%s %2zu %s (%s; %.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
