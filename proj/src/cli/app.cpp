#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "latdiff/canonical.hpp"
#include "latdiff/embedding.hpp"
#include "latdiff/errors.hpp"
#include "latdiff/parallel.hpp"
#include "output.hpp"

namespace latdiff::cli {

namespace {

const std::vector<std::string> kCommands = {"green", "solve",     "field",    "directivity",
                                            "embed", "rank",      "canonical", "validate"};

struct Context {
  const Scenario& sc;
  Wavenumber k;
  std::string out_dir;
  int threads;
  bool svg;
  std::ostream& out;
};

Obstacle obstacle_of(const Context& c, const std::string& command) {
  if (c.sc.obstacle_path.empty())
    throw InputError(c.sc.path + ": field 'obstacle': required by '" + command + "'");
  return Obstacle::load(c.sc.obstacle_path);
}

std::vector<Direction> incidences_of(const Context& c, const std::string& command) {
  if (c.sc.incidences.empty()) throw InputError(c.sc.path + ": field 'incidence': required by '" + command + "'");
  return c.sc.incidences;
}

std::vector<Direction> observations_of(const Context& c) {
  const ObservationSpec& o = c.sc.observations;
  if (o.explicit_directions.empty() && o.count == 0)
    return normalize_observations(angle_grid(100, 0.0, 2.0 * std::numbers::pi));
  return o.directions();
}

std::shared_ptr<const BoundaryOperator> operator_of(const Context& c, const Obstacle& obstacle) {
  auto table = std::make_shared<GreenTable>(c.k);
  return std::make_shared<BoundaryOperator>(obstacle, table, c.threads);
}

std::vector<ScatteringSolution> solve_all(const Context& c, std::shared_ptr<const BoundaryOperator> op,
                                          const std::vector<Direction>& incidences) {
  std::vector<WaveRoots> roots;
  for (const auto& d : incidences) roots.push_back(solve_dispersion(d, c.k));
  std::vector<std::optional<ScatteringSolution>> tmp(incidences.size());
  parallel_for(incidences.size(), c.threads,
               [&](std::size_t j) { tmp[j] = solve_scattering(op, Incidence::plane(roots[j])); });
  std::vector<ScatteringSolution> sols;
  for (auto& s : tmp) sols.push_back(std::move(*s));
  return sols;
}

std::vector<DirectivityRow> rows_of(const DirectivityTable& t, std::size_t j) {
  std::vector<DirectivityRow> rows;
  for (std::size_t i = 0; i < t.observations.size(); ++i)
    rows.push_back({t.observations[i], t.values(i, j), t.modified(i, j), t.flagged[i][j]});
  return rows;
}

std::vector<double> angles_of(const std::vector<Direction>& obs) {
  std::vector<double> a;
  for (const auto& d : obs) a.push_back(d.angle());
  return a;
}

std::string indexed(const std::string& stem, std::size_t j, std::size_t count, const std::string& ext) {
  if (count == 1) return stem + ext;
  return stem + "_" + std::to_string(j) + ext;
}

// --- green --------------------------------------------------------------

int cmd_green(const Context& c) {
  std::vector<Site> sites = c.sc.sites;
  if (sites.empty()) {
    int r = c.sc.green_radius;
    for (int m = -r; m <= r; ++m)
      for (int n = -r; n <= r; ++n) sites.push_back({m, n});
  }
  GreenTable table(c.k);
  std::vector<Site> needed;
  for (Site s : sites) {
    needed.push_back(s);
    for (Site e : kAxisSteps) needed.push_back(s + e);
  }
  table.prefetch(needed, c.threads);
  FieldSampler g = [&](Site s) -> std::optional<Complex> { return table(s); };
  std::string csv = "m,n,G_re,G_im,residual\n";
  double worst = 0.0;
  for (Site s : sites) {
    Complex res = helmholtz_residual(g, s, c.k) - (s == Site{0, 0} ? 1.0 : 0.0);
    worst = std::max(worst, std::abs(res));
    Complex v = table(s);
    csv += std::to_string(s.m) + ',' + std::to_string(s.n) + ',' + num(v.real()) + ',' + num(v.imag()) + ',' +
           num(std::abs(res)) + '\n';
  }
  write_file(c.out_dir, "green.csv", csv);
  c.out << "sites=" << sites.size() << " max_residual=" << num(worst) << "\n";
  return kOk;
}

// --- solve --------------------------------------------------------------

int cmd_solve(const Context& c) {
  Obstacle obstacle = obstacle_of(c, "solve");
  auto incs = incidences_of(c, "solve");
  auto op = operator_of(c, obstacle);
  auto sols = solve_all(c, op, incs);
  FeatureSet features = enumerate_features(obstacle);

  std::string csv = "incidence,beta_in,node_m,node_n,kind,density_re,density_im\n";
  std::ostringstream summary;
  summary << "obstacle=" << obstacle.name() << "\nnodes=" << obstacle.size() << "\nboundary_nodes=" << op->size()
          << "\ncount_N=" << features.count_N << "\ncondition=" << num(op->condition_estimate()) << "\n";
  for (std::size_t j = 0; j < sols.size(); ++j) {
    for (std::size_t i = 0; i < op->size(); ++i) {
      const BoundaryNode& b = op->boundary()[i];
      Complex x = sols[j].densities(static_cast<Eigen::Index>(i));
      csv += std::to_string(j) + ',' + num(incs[j].beta()) + ',' + std::to_string(b.site.m) + ',' +
             std::to_string(b.site.n) + ',' + to_string(b.kind) + ',' + num(x.real()) + ',' + num(x.imag()) + '\n';
    }
    summary << "residual_" << j << "=" << num(sols[j].residual) << "\n";
  }
  write_file(c.out_dir, "solve.csv", csv);
  write_file(c.out_dir, "solve_summary.txt", summary.str());
  c.out << summary.str();
  return kOk;
}

// --- field --------------------------------------------------------------

int cmd_field(const Context& c) {
  Obstacle obstacle = obstacle_of(c, "field");
  auto incs = incidences_of(c, "field");
  std::array<int, 4> box{obstacle.bbox_min().m - 10, obstacle.bbox_max().m + 10, obstacle.bbox_min().n - 10,
                         obstacle.bbox_max().n + 10};
  if (c.sc.field_box) box = *c.sc.field_box;
  std::vector<Site> sites;
  for (int n = box[2]; n <= box[3]; ++n)
    for (int m = box[0]; m <= box[1]; ++m) sites.push_back({m, n});

  auto op = operator_of(c, obstacle);
  auto sols = solve_all(c, op, incs);
  std::vector<Site> needed;
  for (const auto& b : op->boundary())
    for (Site s : sites) needed.push_back(s - b.site);
  op->green().prefetch(needed, c.threads);

  std::string csv = "incidence,m,n,total_re,total_im,scattered_re,scattered_im\n";
  for (std::size_t j = 0; j < sols.size(); ++j) {
    std::vector<Complex> total(sites.size()), inc(sites.size());
    parallel_for(sites.size(), c.threads, [&](std::size_t i) {
      inc[i] = sols[j].incidence(sites[i]);
      total[i] = obstacle.contains(sites[i]) ? Complex(0.0) : total_field(sols[j], sites[i]);
    });
    for (std::size_t i = 0; i < sites.size(); ++i) {
      Complex sc = total[i] - inc[i];
      csv += std::to_string(j) + ',' + std::to_string(sites[i].m) + ',' + std::to_string(sites[i].n) + ',' +
             num(total[i].real()) + ',' + num(total[i].imag()) + ',' + num(sc.real()) + ',' + num(sc.imag()) + '\n';
    }
  }
  write_file(c.out_dir, "field.csv", csv);
  c.out << "sites=" << sites.size() << " incidences=" << sols.size() << "\n";
  return kOk;
}

// --- directivity --------------------------------------------------------

int cmd_directivity(const Context& c) {
  Obstacle obstacle = obstacle_of(c, "directivity");
  auto incs = incidences_of(c, "directivity");
  auto obs = observations_of(c);
  auto op = operator_of(c, obstacle);
  auto sols = solve_all(c, op, incs);
  DirectivityTable t = directivity_table(sols, obs, c.threads);
  for (std::size_t j = 0; j < incs.size(); ++j) {
    auto rows = rows_of(t, j);
    write_file(c.out_dir, indexed("directivity", j, incs.size(), ".csv"), directivity_csv(rows));
    if (c.svg) {
      std::vector<double> s, sm;
      for (const auto& r : rows) {
        s.push_back(std::abs(r.S));
        sm.push_back(std::abs(r.smod));
      }
      write_file(c.out_dir, indexed("directivity", j, incs.size(), ".svg"),
                 svg_plot("directivity, beta_in = " + num(incs[j].beta()), angles_of(obs),
                          {{"|S|", s}, {"|S~|", sm}}));
    }
  }
  c.out << "observations=" << obs.size() << " incidences=" << incs.size() << "\n";
  return kOk;
}

// --- embed --------------------------------------------------------------

int cmd_embed(const Context& c) {
  Obstacle obstacle = obstacle_of(c, "embed");
  auto incs = incidences_of(c, "embed");
  if (incs.size() != 1) throw InputError(c.sc.path + ": field 'incidence': 'embed' takes exactly one incidence");
  const Direction beta_in = incs[0];
  auto obs = observations_of(c);
  auto op = operator_of(c, obstacle);

  std::vector<Direction> betas = c.sc.basis;
  if (betas.empty()) betas = default_basis(enumerate_features(obstacle).count_N);
  BasisOptions bo;
  bo.allow_count_mismatch = c.sc.allow_count_mismatch;
  bo.threads = c.threads;
  EmbeddingBasis basis = build_basis(op, betas, bo);

  auto direct = solve_all(c, op, {beta_in});
  DirectivityTable dt = directivity_table(direct, obs, c.threads);
  DirectivityTable aux = directivity_table(basis.solutions, obs, c.threads);
  Eigen::VectorXcd A = solve_coefficients(basis, beta_in);
  EmbeddedDirectivity emb = embed_directivity(basis, A, aux, beta_in);

  double worst = 0.0;
  std::size_t used = 0;
  std::vector<DirectivityRow> embedded;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    embedded.push_back({obs[i], emb.values[i], emb.modified[i], emb.flagged[i]});
    if (emb.flagged[i]) continue;
    Complex d = dt.values(static_cast<Eigen::Index>(i), 0);
    worst = std::max(worst, std::abs(emb.values[i] - d) / std::abs(d));
    ++used;
  }
  write_file(c.out_dir, "direct.csv", directivity_csv(rows_of(dt, 0)));
  write_file(c.out_dir, "embedded.csv", directivity_csv(embedded));

  std::string coeffs = "index,beta,basis_m,basis_n,A_re,A_im\n";
  for (std::size_t l = 0; l < basis.size(); ++l) {
    Complex a = A(static_cast<Eigen::Index>(l));
    coeffs += std::to_string(l) + ',' + num(basis.betas[l].beta()) + ',' + num(basis.betas[l].m()) + ',' +
              num(basis.betas[l].n()) + ',' + num(a.real()) + ',' + num(a.imag()) + '\n';
  }
  write_file(c.out_dir, "coefficients.csv", coeffs);

  bool pass = worst <= c.sc.tolerance;
  std::ostringstream summary;
  summary << "count_N=" << basis.count_N << "\nbasis=" << basis.size() << "\nbasis_condition="
          << num(basis.condition) << "\ncompared=" << used << "\nflagged=" << obs.size() - used
          << "\nmax_rel_dev=" << num(worst) << "\ntolerance=" << num(c.sc.tolerance)
          << "\nstatus=" << (pass ? "ok" : "fail") << "\n";
  for (const auto& w : basis.warnings) summary << "warning=" << w << "\n";
  write_file(c.out_dir, "embed_summary.txt", summary.str());
  c.out << summary.str();

  if (c.svg) {
    std::vector<double> d, e;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      d.push_back(std::abs(dt.values(static_cast<Eigen::Index>(i), 0)));
      e.push_back(std::abs(emb.values[i]));
    }
    write_file(c.out_dir, "embed.svg",
               svg_plot("direct vs embedded |S|", angles_of(obs), {{"direct", d}, {"embedded", e}}));
  }
  return pass ? kOk : kValidationFailure;
}

// --- rank ---------------------------------------------------------------

int cmd_rank(const Context& c, double threshold) {
  Obstacle obstacle = obstacle_of(c, "rank");
  auto op = operator_of(c, obstacle);
  const RankSpec& r = c.sc.rank;
  std::vector<RankRow> rows;
  for (int M = r.m_min; M <= r.m_max; ++M) {
    std::vector<Direction> probes;
    if (r.probes.empty()) probes = default_probes(M);
    else probes.assign(r.probes.begin(), r.probes.begin() + M);
    RankResult res = rank_probe(modified_matrix(op, probes, c.threads), threshold);
    rows.push_back({M, res.rank, res.singular_values});
  }
  write_file(c.out_dir, "rank.csv", rank_csv(rows));
  c.out << "count_N=" << enumerate_features(obstacle).count_N << "\n";
  c.out << "rank=" << rows.back().rank << "\n";
  return kOk;
}

// --- canonical ----------------------------------------------------------

DirectivityFn tabulated(const std::string& path) {
  auto rows = std::make_shared<std::vector<DirectivityRow>>(load_directivity_csv(path));
  return [rows, path](const Direction& d) -> Complex {
    for (const auto& r : *rows)
      if (r.observation.same_ray(d, 1e-9)) {
        if (!std::isfinite(r.S.real())) break;
        return r.S;
      }
    throw InputError(path + ": no usable entry for direction " + d.str());
  };
}

const Direction& required(const std::optional<Direction>& d, const Context& c, const std::string& field) {
  if (!d) throw InputError(c.sc.path + ": field 'canonical." + field + "': required by this formula");
  return *d;
}

const std::string& required_path(const std::string& p, const Context& c, const std::string& field) {
  if (p.empty()) throw InputError(c.sc.path + ": field 'canonical." + field + "': required by this formula");
  return p;
}

int canonical_constants(const Context& c) {
  HalfPlaneConstants h = halfplane_constants(c.k);
  std::string csv = "name,re,im\n";
  auto add = [&](const char* name, Complex v) { csv += std::string(name) + ',' + num(v.real()) + ',' + num(v.imag()) + '\n'; };
  add("d1", h.d1);
  add("d2", h.d2);
  add("eta_o1", h.eta_o1);
  add("eta_i1", h.eta_i1);
  add("eta_o2", h.eta_o2);
  add("eta_i2", h.eta_i2);
  add("root_product", h.root_product);
  double ident = std::max({std::abs(h.eta_o1 * h.eta_i1 - 1.0), std::abs(h.eta_o1 + h.eta_i1 + h.d1),
                           std::abs(h.eta_o2 * h.eta_i2 - 1.0), std::abs(h.eta_o2 + h.eta_i2 + h.d2)});
  double factor = 0.0;
  for (int j = 0; j < 64; ++j) {
    Complex s = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / 64.0);
    KernelValues v = kernel_and_transforms(s, 1.0, h);
    factor = std::max(factor, std::abs(v.upsilon * v.v_minus - v.v_plus) / std::abs(v.v_plus));
  }
  write_file(c.out_dir, "constants.csv", csv);
  bool pass = ident <= 1e-14 * (1.0 + std::abs(h.eta_o2)) && factor <= 1e-12;
  c.out << "identity_residual=" << num(ident) << "\nfactorisation_residual=" << num(factor)
        << "\nstatus=" << (pass ? "ok" : "fail") << "\n";
  return pass ? kOk : kValidationFailure;
}

int canonical_edge_green(const Context& c) {
  TruncatedEdgeGreen e(c.sc.canonical.edge_length, c.k, c.threads);
  Complex root = halfplane_constants(c.k).root_product;
  Complex check = e.value_at_source() * root;
  std::string csv = "quantity,re,im\n";
  csv += "v00," + num(e.value_at_source().real()) + ',' + num(e.value_at_source().imag()) + '\n';
  csv += "v00_root_product," + num(check.real()) + ',' + num(check.imag()) + '\n';
  write_file(c.out_dir, "edge_green.csv", csv);
  // A point source has no incident root, so S~ is written equal to S.
  std::vector<DirectivityRow> rows;
  for (const auto& d : observations_of(c)) {
    Complex s = e.directivity(d);
    rows.push_back({d, s, s, false});
  }
  write_file(c.out_dir, "edge_directivity.csv", directivity_csv(rows));
  double dev = std::abs(check - 1.0);
  bool pass = dev <= c.sc.tolerance;
  c.out << "v00_root_product_deviation=" << num(dev) << "\nstatus=" << (pass ? "ok" : "fail") << "\n";
  return pass ? kOk : kValidationFailure;
}

int canonical_formula(const Context& c) {
  const CanonicalSpec& cs = c.sc.canonical;
  auto incs = incidences_of(c, "canonical");
  auto obs = observations_of(c);
  DirectivityFn S1 = tabulated(required_path(cs.aux1, c, "aux1"));
  DirectivityFn S2;
  if (!cs.aux2.empty()) S2 = tabulated(cs.aux2);

  for (std::size_t j = 0; j < incs.size(); ++j) {
    std::vector<DirectivityRow> rows;
    for (const auto& d : obs) {
      FlaggedValue v;
      if (cs.formula == "halfplane") {
        v = halfplane_embedding(S1, d, incs[j], required(cs.beta1, c, "beta1"), c.k);
      } else if (cs.formula == "strip") {
        v = strip_embedding(S1, S2, d, incs[j], required(cs.beta1, c, "beta1"), c.k);
      } else if (cs.formula == "edge") {
        v = edge_strong_embedding(S1, d, incs[j], c.k);
      } else {
        if (!S2) required_path(cs.aux2, c, "aux2");
        const Direction& b1 = required(cs.beta1, c, "beta1");
        Direction b2 = cs.beta2 ? *cs.beta2 : Direction(-b1.n(), -b1.m());
        if (std::abs(modified_factor(d, incs[j], c.k)) < 1e-8) {
          v = {std::numeric_limits<double>::quiet_NaN(), true};
        } else {
          // The printed combination carries the opposite sign.
          v = {-wedge_embedding(S1, S2, d, incs[j], b1, b2, c.k), false};
        }
      }
      Complex smod = v.pole ? v.value : modified_directivity(v.value, d, incs[j], c.k);
      rows.push_back({d, v.value, smod, v.pole});
    }
    write_file(c.out_dir, indexed("canonical", j, incs.size(), ".csv"), directivity_csv(rows));
  }
  c.out << "formula=" << cs.formula << " observations=" << obs.size() << " incidences=" << incs.size() << "\n";
  return kOk;
}

int cmd_canonical(const Context& c) {
  const std::string& f = c.sc.canonical.formula;
  if (f == "constants") return canonical_constants(c);
  if (f == "edge_green") return canonical_edge_green(c);
  if (f == "halfplane" || f == "strip" || f == "wedge" || f == "edge") return canonical_formula(c);
  if (f.empty()) throw InputError(c.sc.path + ": field 'canonical': required by 'canonical'");
  throw InputError(c.sc.path + ": field 'canonical.formula': unknown formula '" + f + "'");
}

// --- validate -----------------------------------------------------------

struct Check {
  std::string name;
  double value, limit;
};

int cmd_validate(const Context& c) {
  std::vector<Check> checks;

  {
    GreenTable table(c.k);
    int r = c.sc.green_radius;
    std::vector<Site> sites;
    for (int m = -r - 1; m <= r + 1; ++m)
      for (int n = -r - 1; n <= r + 1; ++n) sites.push_back({m, n});
    table.prefetch(sites, c.threads);
    FieldSampler g = [&](Site s) -> std::optional<Complex> { return table(s); };
    double worst = 0.0;
    for (int m = -r; m <= r; ++m)
      for (int n = -r; n <= r; ++n) {
        Site s{m, n};
        worst = std::max(worst, std::abs(helmholtz_residual(g, s, c.k) - (s == Site{0, 0} ? 1.0 : 0.0)));
      }
    checks.push_back({"green_delta_residual", worst, 1e-10});
  }

  std::vector<Direction> incs = c.sc.incidences;
  if (incs.empty()) incs.push_back(Direction::from_beta(1.0));
  {
    double worst = 0.0;
    for (const auto& d : incs) {
      WaveRoots w = solve_dispersion(d, c.k);
      FieldSampler u = [&](Site s) -> std::optional<Complex> { return plane_wave(w, s, -1); };
      for (int m = -3; m <= 3; ++m)
        for (int n = -3; n <= 3; ++n) {
          Site s{m, n};
          double scale = std::abs(u(s).value());
          worst = std::max(worst, std::abs(apply_embedding_operator(u, s, w.s, EmbeddingOrder::H1)) / scale);
          worst = std::max(worst, std::abs(apply_embedding_operator(u, s, w.s, EmbeddingOrder::H2)) / scale);
        }
    }
    checks.push_back({"embedding_operator_annihilation", worst, 1e-14});
  }

  if (!c.sc.obstacle_path.empty()) {
    Obstacle obstacle = Obstacle::load(c.sc.obstacle_path);
    auto op = operator_of(c, obstacle);
    auto sols = solve_all(c, op, incs);
    double res = 0.0;
    for (const auto& s : sols) res = std::max(res, s.residual);
    checks.push_back({"bae_solve_residual", res, 1e-10});

    std::mt19937_64 rng(c.sc.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<Direction> dirs;
    for (int p = 0; p < 2 * c.sc.pairs; ++p) dirs.push_back(Direction::from_angle(angle(rng)));
    auto pair_sols = solve_all(c, op, dirs);
    double diff = 0.0, scale = 0.0;
    for (int p = 0; p < c.sc.pairs; ++p) {
      Complex ab = directivity(pair_sols[2 * p + 1], dirs[2 * p]);
      Complex ba = directivity(pair_sols[2 * p], dirs[2 * p + 1]);
      diff = std::max(diff, std::abs(ab - ba));
      scale = std::max({scale, std::abs(ab), std::abs(ba)});
    }
    checks.push_back({"reciprocity", diff / scale, 1e-8});

    if (!c.sc.basis.empty()) {
      BasisOptions bo;
      bo.allow_count_mismatch = c.sc.allow_count_mismatch;
      bo.threads = c.threads;
      EmbeddingBasis basis = build_basis(op, c.sc.basis, bo);
      Eigen::VectorXcd A = solve_coefficients(basis, incs[0]);
      auto sites = random_exterior_sites(obstacle, 50, 6, c.sc.seed);
      WeakEmbeddingCheck w = weak_embedding_field_check(basis, A, sols[0], sites);
      checks.push_back({"weak_embedding_residual", w.max_residual / w.field_scale, 1e-8});
    }
  }

  std::string csv = "check,value,limit,status\n";
  bool pass = true;
  for (const auto& ch : checks) {
    bool ok = ch.value <= ch.limit;
    pass = pass && ok;
    csv += ch.name + ',' + num(ch.value) + ',' + num(ch.limit) + ',' + (ok ? "ok" : "fail") + '\n';
    c.out << (ok ? "PASS " : "FAIL ") << ch.name << " value=" << num(ch.value) << " limit=" << num(ch.limit)
          << "\n";
  }
  write_file(c.out_dir, "validate.csv", csv);
  return pass ? kOk : kValidationFailure;
}

}  // namespace

int run_command(const std::string& command, const Scenario& scenario, const RunOptions& options, std::ostream& out) {
  int threads = options.threads > 0 ? options.threads : scenario.threads;
  set_default_threads(threads);
  Context c{scenario, Wavenumber(scenario.wavenumber), options.out.empty() ? scenario.outputs : options.out,
            threads, options.svg, out};
  ensure_directory(c.out_dir);
  if (command == "green") return cmd_green(c);
  if (command == "solve") return cmd_solve(c);
  if (command == "field") return cmd_field(c);
  if (command == "directivity") return cmd_directivity(c);
  if (command == "embed") return cmd_embed(c);
  if (command == "rank") return cmd_rank(c, options.threshold.value_or(scenario.rank.threshold));
  if (command == "canonical") return cmd_canonical(c);
  if (command == "validate") return cmd_validate(c);
  throw InputError("unknown command '" + command + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffraction by obstacles on a square lattice"};
  app.name("latdiff");
  app.require_subcommand(1, 1);

  std::string scenario_path;
  RunOptions opts;
  double threshold = 0.0;
  bool no_svg = false;
  std::vector<CLI::App*> subs;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    s->add_option("--out", opts.out, "output directory");
    s->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
    s->add_flag("--no-svg", no_svg, "skip SVG plots");
    s->add_flag("--svg", "write SVG plots (default)");
    subs.push_back(s);
    return s;
  };
  add("green", "tabulate the lattice Green's function");
  add("solve", "solve the boundary equations");
  add("field", "total and scattered field on a box");
  add("directivity", "far-field directivities");
  add("embed", "embedding formula against direct solves");
  add("rank", "rank probe of the modified directivity matrix")
      ->add_option("--threshold", threshold, "singular value threshold")
      ->check(CLI::PositiveNumber);
  add("canonical", "closed-form canonical embeddings");
  add("validate", "self-consistency checks");
  add("run", "run the scenario's own command");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (threshold > 0.0) opts.threshold = threshold;
  opts.svg = !no_svg;

  try {
    Scenario sc = load_scenario(scenario_path);
    std::string command = chosen->get_name();
    if (command == "run") {
      if (sc.command.empty()) throw InputError(sc.path + ": field 'command': required by 'run'");
      if (std::find(kCommands.begin(), kCommands.end(), sc.command) == kCommands.end())
        throw InputError(sc.path + ": field 'command': unknown command '" + sc.command + "'");
      command = sc.command;
    }
    return run_command(command, sc, opts, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace latdiff::cli
