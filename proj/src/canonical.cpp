#include "latdiff/canonical.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "latdiff/embedding.hpp"
#include "latdiff/errors.hpp"

namespace latdiff {

namespace {

constexpr double kPoleTol = 1e-8;
const Complex kI(0.0, 1.0);

bool identities_hold(const HalfPlaneConstants& c) {
  auto ok = [](Complex o, Complex i, Complex d) {
    double scale = 1.0 + std::abs(o) + std::abs(i);
    return std::abs(o * i - 1.0) <= 1e-14 * scale && std::abs(o + i + d) <= 1e-14 * scale;
  };
  return ok(c.eta_o1, c.eta_i1, c.d1) && ok(c.eta_o2, c.eta_i2, c.d2);
}

struct Radicals {
  Complex inner;  // s sqrt(1 - eta_i1/s) sqrt(1 - eta_i2/s)
  Complex outer;  // sqrt(1 - s/eta_o1) sqrt(1 - s/eta_o2), without the constant
};

Radicals radicals(Complex s, const HalfPlaneConstants& c) {
  return {s * std::sqrt(1.0 - c.eta_i1 / s) * std::sqrt(1.0 - c.eta_i2 / s),
          std::sqrt(1.0 - s / c.eta_o1) * std::sqrt(1.0 - s / c.eta_o2)};
}

WaveRoots roots(const Direction& d, const Wavenumber& k) { return solve_dispersion(d, k); }

}  // namespace

HalfPlaneConstants halfplane_constants(const Wavenumber& k) {
  HalfPlaneConstants c;
  Complex k2 = k.squared();
  c.d1 = k2 - 2.0;
  c.d2 = k2 - 6.0;
  Complex r1 = std::sqrt(4.0 - c.d1 * c.d1);
  Complex r2 = std::sqrt(c.d2 * c.d2 - 4.0);
  c.eta_o1 = -0.5 * c.d1 - 0.5 * kI * r1;
  c.eta_i1 = -0.5 * c.d1 + 0.5 * kI * r1;
  c.eta_o2 = -0.5 * c.d2 + 0.5 * r2;
  c.eta_i2 = -0.5 * c.d2 - 0.5 * r2;
  if (std::abs(c.eta_o1) < 1.0) {
    std::swap(c.eta_o1, c.eta_i1);
    c.relabelled = true;
  }
  if (std::abs(c.eta_o2) < 1.0) {
    std::swap(c.eta_o2, c.eta_i2);
    c.relabelled = true;
  }
  if (!identities_hold(c) || std::abs(c.eta_o1) <= 1.0 || std::abs(c.eta_o2) <= 1.0)
    throw NumericalError("half-plane constants failed the root-pair identities");

  // Branch of sqrt(eta_o1 eta_o2): the kernel must equal (q - 1/q)/2 with
  // |q| < 1 on the unit circle; compare at s = 1.
  Complex principal = std::sqrt(c.eta_o1 * c.eta_o2);
  Radicals r = radicals(1.0, c);
  Complex upsilon = 0.5 * principal * r.outer * r.inner;
  Complex b = 2.0 - k2;
  Complex d = std::sqrt(b * b - 4.0);
  Complex q = 0.5 * (b - d);
  if (std::abs(q) > 1.0) q = 0.5 * (b + d);
  Complex target = 0.5 * (q - 1.0 / q);
  c.root_product = std::abs(upsilon - target) <= std::abs(upsilon + target) ? principal : -principal;
  return c;
}

KernelValues kernel_and_transforms(Complex s, Complex C1, const HalfPlaneConstants& c) {
  for (Complex eta : {c.eta_o1, c.eta_o2, c.eta_i1, c.eta_i2})
    if (std::abs(s - eta) < 1e-12) throw DomainError("kernel evaluated at a branch point");
  if (std::abs(s) < 1e-300) throw DomainError("kernel evaluated at s = 0");
  Radicals r = radicals(s, c);
  Complex outer = c.root_product * r.outer;
  Complex A = 0.5 * C1;
  KernelValues v;
  v.upsilon = outer * r.inner / (2.0 * s);
  v.v_minus = 2.0 * s * A / r.inner;
  v.v_plus = A * outer;
  v.c2 = c.root_product * C1;
  return v;
}

KernelValues kernel_and_transforms(Complex s, Complex C1, const Wavenumber& k) {
  return kernel_and_transforms(s, C1, halfplane_constants(k));
}

Complex inverse_transform_minus(int m, Complex C1, const HalfPlaneConstants& c, int nodes) {
  if (nodes < 1) throw InputError("node count must be positive");
  Complex sum = 0.0;
  for (int j = 0; j < nodes; ++j) {
    Complex s = std::polar(1.0, 2.0 * std::numbers::pi * j / nodes);
    sum += kernel_and_transforms(s, C1, c).v_minus * ipow(s, m);
  }
  return sum / static_cast<double>(nodes);
}

Complex hat_factor(const WaveRoots& a, const WaveRoots& b) { return 1.0 - 1.0 / (a.s * b.s); }

FlaggedValue halfplane_embedding(const DirectivityFn& S_aux, const Direction& beta, const Direction& beta_in,
                                 const Direction& beta1, const Wavenumber& k) {
  WaveRoots r = roots(beta, k), rin = roots(beta_in, k), r1 = roots(beta1, k);
  Complex pole = hat_factor(r, rin);
  if (std::abs(pole) < kPoleTol) return {std::numeric_limits<double>::quiet_NaN(), true};
  Complex h11 = hat_factor(r1, r1) * S_aux(beta1);
  if (h11 == 0.0) throw DomainError("auxiliary half-plane directivity vanishes at its own incidence");
  Complex hb = hat_factor(r, r1) * S_aux(beta);
  Complex hin = hat_factor(rin, r1) * S_aux(beta_in);
  return {hb * hin / (pole * h11), false};
}

FlaggedValue strip_embedding(const DirectivityFn& S_aux1, const DirectivityFn& S_aux2, const Direction& beta,
                             const Direction& beta_in, const Direction& beta1, const Wavenumber& k) {
  Direction beta2 = beta1.mirrored();
  DirectivityFn S2 = S_aux2 ? S_aux2 : DirectivityFn([&](const Direction& d) { return S_aux1(d.mirrored()); });
  WaveRoots r = roots(beta, k), rin = roots(beta_in, k), r1 = roots(beta1, k), r2 = roots(beta2, k);
  Complex pole = hat_factor(r, rin);
  if (std::abs(pole) < kPoleTol) return {std::numeric_limits<double>::quiet_NaN(), true};
  Complex h11 = hat_factor(r1, r1) * S_aux1(beta1);
  Complex h22 = hat_factor(r2, r2) * S2(beta2);
  if (h11 == 0.0 || h22 == 0.0) throw DomainError("auxiliary strip directivity vanishes at its own incidence");
  Complex term1 = hat_factor(rin, r1) * S_aux1(beta_in) / h11 * hat_factor(r, r1) * S_aux1(beta);
  Complex term2 = hat_factor(rin, r2) * S2(beta_in) / h22 * hat_factor(r, r2) * S2(beta);
  return {(term1 + term2) / pole, false};
}

Complex wedge_embedding(const DirectivityFn& S_aux1, const DirectivityFn& S_aux2, const Direction& beta,
                        const Direction& beta_in, const Direction& beta1, const Direction& beta2,
                        const Wavenumber& k) {
  if (std::abs(beta1.m() * beta2.m() - beta1.n() * beta2.n()) > 1e-12 * beta1.norm() * beta2.norm())
    throw InputError("wedge auxiliary incidences need beta2 = 1/beta1");
  WaveRoots r = roots(beta, k), rin = roots(beta_in, k), r1 = roots(beta1, k), r2 = roots(beta2, k);
  auto smod1 = [&](const WaveRoots& x, const Direction& d) { return modified_factor(x, r1) * S_aux1(d); };
  auto smod2 = [&](const WaveRoots& x, const Direction& d) { return modified_factor(x, r2) * S_aux2(d); };
  Complex s12 = smod2(r1, beta1);
  if (s12 == 0.0) throw DomainError("degenerate wedge basis: S~(beta1, beta2) = 0");
  Complex f = modified_factor(r, rin);
  if (f == 0.0) throw DomainError("wedge formula evaluated where the modified factor vanishes");
  Complex num = smod2(r, beta) * smod1(rin, beta_in) - smod1(r, beta) * smod2(rin, beta_in);
  return num / (f * s12);
}

FlaggedValue edge_strong_embedding(const DirectivityFn& S_edge, const Direction& beta, const Direction& beta_in,
                                   const Wavenumber& k) {
  WaveRoots r = roots(beta, k), rin = roots(beta_in, k);
  Complex pole = hat_factor(r, rin);
  if (std::abs(pole) < kPoleTol) return {std::numeric_limits<double>::quiet_NaN(), true};
  Complex root = halfplane_constants(k).root_product;
  return {-root * S_edge(beta_in) * S_edge(beta) / pole, false};
}

TruncatedEdgeGreen::TruncatedEdgeGreen(int length, const Wavenumber& k, int threads) {
  if (length < 1) throw InputError("edge segment length must be positive");
  std::vector<Site> nodes;
  for (int m = 1; m <= length; ++m) nodes.push_back({m, 0});
  table_ = std::make_shared<GreenTable>(k);
  auto op = std::make_shared<BoundaryOperator>(Obstacle(nodes, "edge segment"), table_, threads);
  sol_ = solve_scattering(op, Incidence::point_source({0, 0}, table_));
  v00_ = field({0, 0});
}

Complex TruncatedEdgeGreen::field(Site s) const { return total_field(sol_, s); }

Complex TruncatedEdgeGreen::directivity(const Direction& d) const { return 1.0 + latdiff::directivity(sol_, d); }

}  // namespace latdiff
