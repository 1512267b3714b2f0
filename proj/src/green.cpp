#include "latdiff/green.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "latdiff/errors.hpp"
#include "latdiff/parallel.hpp"

namespace latdiff {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kStartNodes = 512;
constexpr int kMaxNodes = 1 << 20;

// The circle |s| = 1 is pushed to theta = x - i a sin x. Along that path
// Im(2 cos theta) >= 0, so (4 - k^2 - 2 cos theta) never becomes real and
// |q| = 1 is never crossed: the |q| < 1 branch stays the analytic one. The
// shift damps e^{i m theta}; larger m needs a smaller shift to keep the
// integrand from growing.
double deformation(int m) { return 0.3 / (1.0 + m / 3.0); }

struct Integrand {
  int m, n;
  double a;
  Complex c;

  Complex operator()(double x) const {
    Complex theta(x, -a * std::sin(x));
    Complex b = c - 2.0 * std::cos(theta);
    Complex d = std::sqrt(b * b - 4.0);
    Complex big = 0.5 * (b + d);
    if (std::abs(big) < 1.0) big = 0.5 * (b - d);
    Complex q = 1.0 / big;
    Complex jac(1.0, -a * std::cos(x));
    return std::exp(Complex(0, 1) * static_cast<double>(m) * theta) * ipow(q, n) / (q - big) * jac;
  }
};

Integrand make_integrand(Site site, const Wavenumber& k) {
  Site cs = canonical_site(site);
  return {cs.m, cs.n, deformation(cs.m), 4.0 - k.squared()};
}

// Sum of f and of |f| over the nodes x_j = 2 pi (j + offset) / count.
std::pair<Complex, double> node_sum(const Integrand& f, int count, double offset) {
  Complex sum = 0.0;
  double mag = 0.0;
  for (int j = 0; j < count; ++j) {
    Complex v = f(2.0 * kPi * (j + offset) / count);
    sum += v;
    mag += std::abs(v);
  }
  return {sum, mag};
}

}  // namespace

Site canonical_site(Site site) {
  int a = std::abs(site.m), b = std::abs(site.n);
  return a <= b ? Site{a, b} : Site{b, a};
}

Complex green_trapezoid(Site site, const Wavenumber& k, int nodes) {
  if (nodes < 1) throw InputError("node count must be positive");
  auto f = make_integrand(site, k);
  return node_sum(f, nodes, 0.0).first / static_cast<double>(nodes);
}

QuadratureResult green_quadrature(Site site, const Wavenumber& k) {
  auto f = make_integrand(site, k);
  int nodes = kStartNodes;
  auto [sum, mag] = node_sum(f, nodes, 0.0);
  Complex prev = sum / static_cast<double>(nodes);
  while (nodes < kMaxNodes) {
    // Doubling reuses the old nodes; only the midpoints are new.
    auto [mid, mid_mag] = node_sum(f, nodes, 0.5);
    sum += mid;
    mag += mid_mag;
    nodes *= 2;
    Complex cur = sum / static_cast<double>(nodes);
    double floor = 8.0 * std::numeric_limits<double>::epsilon() * mag / nodes;
    if (std::abs(cur - prev) <= 1e-13 * std::abs(cur) + floor) return {cur, nodes};
    prev = cur;
  }
  Site cs = canonical_site(site);
  throw NumericalError("Green quadrature did not converge at (" + std::to_string(cs.m) + "," +
                       std::to_string(cs.n) + ") with " + std::to_string(kMaxNodes) + " nodes");
}

GreenTable::GreenTable(const Wavenumber& k) : k_(k) {}

Complex GreenTable::value(Site site) const {
  Site key = canonical_site(site);
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second.value;
  }
  auto r = green_quadrature(key, k_);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, Entry{r.value, r.nodes});
  return it->second.value;
}

int GreenTable::nodes(Site site) const {
  std::shared_lock lock(mutex_);
  auto it = cache_.find(canonical_site(site));
  return it == cache_.end() ? 0 : it->second.nodes;
}

std::size_t GreenTable::size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

void GreenTable::prefetch(const std::vector<Site>& sites, int threads) const {
  std::vector<Site> missing;
  {
    std::shared_lock lock(mutex_);
    for (Site s : sites) {
      Site key = canonical_site(s);
      if (!cache_.count(key)) missing.push_back(key);
    }
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::vector<QuadratureResult> results(missing.size());
  parallel_for(missing.size(), threads, [&](std::size_t i) { results[i] = green_quadrature(missing[i], k_); });
  std::unique_lock lock(mutex_);
  for (std::size_t i = 0; i < missing.size(); ++i)
    cache_.emplace(missing[i], Entry{results[i].value, results[i].nodes});
}

Complex green(Site site, const Wavenumber& /*k*/, const GreenTable& table) { return table.value(site); }

namespace {

// The root of z + 1/z = t closest to `near`.
Complex follow_root(Complex t, Complex near) {
  Complex d = std::sqrt(t * t - 4.0);
  Complex a = 0.5 * (t + d), b = 0.5 * (t - d);
  return std::abs(a - near) <= std::abs(b - near) ? a : b;
}

// phi'' for phi(s) = mt log s + nt log q(s), with q(s) on the dispersion curve.
Complex phi_second_s(Complex s, Complex q, double mt, double nt) {
  Complex dq = q - 1.0 / q;
  Complex qp = -q * (s - 1.0 / s) / (s * dq);
  Complex hp = (2.0 / (s * s * s)) / dq - (1.0 - 1.0 / (s * s)) * (1.0 + 1.0 / (q * q)) * qp / (dq * dq);
  return -mt / (s * s) - nt * hp;
}

}  // namespace

SaddleData saddle_data(const Direction& direction, const Wavenumber& k) {
  SaddleData sd;
  sd.roots = solve_dispersion(direction, k);
  sd.k_squared = k.squared();
  double nm = direction.norm();
  double mt = direction.m() / nm, nt = direction.n() / nm;
  sd.swapped = std::abs(nt) < std::abs(mt);
  if (!sd.swapped)
    sd.phi_second = phi_second_s(sd.roots.s, sd.roots.q, mt, nt);
  else
    sd.phi_second = phi_second_s(sd.roots.q, sd.roots.s, nt, mt);
  sd.phi0 = 0.5 * (kPi - std::arg(sd.phi_second));
  return sd;
}

Complex saddle_phase(const SaddleData& sd, Complex z) {
  const Direction& d = sd.roots.direction;
  double nm = d.norm();
  double mt = d.m() / nm, nt = d.n() / nm;
  Complex c = 4.0 - sd.k_squared;
  Complex z0 = sd.swapped ? sd.roots.q : sd.roots.s;
  Complex w0 = sd.swapped ? sd.roots.s : sd.roots.q;
  if (sd.swapped) std::swap(mt, nt);
  Complex w = follow_root(c - z - 1.0 / z, w0);
  return mt * std::log(z / z0) + nt * std::log(w / w0);
}

Complex green_asymptotic(const Direction& direction, double N, const Wavenumber& k) {
  if (!(N >= 10.0)) throw InputError("asymptotic distance must be at least 10");
  // Fold into the octant 0 <= m <= n, where the s-parametrised saddle is
  // regular; G has the same symmetries.
  double nm = direction.norm();
  double x = std::abs(direction.m()) / nm * N;
  double y = std::abs(direction.n()) / nm * N;
  if (x > y) std::swap(x, y);
  Direction folded(x, y);
  SaddleData sd = saddle_data(folded, k);
  Complex s = sd.roots.s, q = sd.roots.q;
  Complex wave = std::exp(x * std::log(s) + y * std::log(q));
  // Prefactor fixed against the quadrature G at large N along m = n.
  Complex spread = std::sqrt(2.0 * kPi / (N * -sd.phi_second));
  return wave * spread / (Complex(0, 2.0 * kPi) * s * (q - 1.0 / q));
}

Complex green_asymptotic(Site site, const Wavenumber& k) {
  double N = std::hypot(static_cast<double>(site.m), static_cast<double>(site.n));
  return green_asymptotic(Direction(site.m, site.n), N, k);
}

}  // namespace latdiff
