#include "latdiff/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

#include "latdiff/errors.hpp"

namespace latdiff {

namespace {

constexpr double kBandEdge = 2.0 * std::numbers::sqrt2;

std::string fmt_site(Site s) { return "(" + std::to_string(s.m) + "," + std::to_string(s.n) + ")"; }

// Root of z + 1/z = t with |z| >= 1 (the other one is its reciprocal).
Complex reciprocal_pair_root(Complex t) {
  Complex d = std::sqrt(t * t - 4.0);
  Complex a = 0.5 * (t + d);
  Complex b = 0.5 * (t - d);
  return std::abs(a) >= std::abs(b) ? a : b;
}

// Newton iterations on the coupled system for a unit direction (dm, dn).
void polish(Complex& s, Complex& q, double dm, double dn, Complex k2) {
  for (int it = 0; it < 6; ++it) {
    Complex is = 1.0 / s, iq = 1.0 / q;
    Complex f1 = s + is + q + iq + k2 - 4.0;
    Complex f2 = dm * (q - iq) - dn * (s - is);
    Complex a11 = 1.0 - is * is, a12 = 1.0 - iq * iq;
    Complex a21 = -dn * (1.0 + is * is), a22 = dm * (1.0 + iq * iq);
    Complex det = a11 * a22 - a12 * a21;
    if (std::abs(det) < 1e-300) return;
    Complex ds = (f1 * a22 - a12 * f2) / det;
    Complex dq = (a11 * f2 - a21 * f1) / det;
    s -= ds;
    q -= dq;
    if (std::abs(ds) + std::abs(dq) < 1e-16 * (std::abs(s) + std::abs(q))) return;
  }
}

const RootCandidate* nearest_t(const std::vector<RootCandidate>& cands, Complex t) {
  const RootCandidate* best = nullptr;
  for (const auto& c : cands) {
    if (c.decay >= 0.0) continue;
    if (!best || std::abs(c.t - t) < std::abs(best->t - t)) best = &c;
  }
  return best;
}

const RootCandidate* most_unimodular(const std::vector<RootCandidate>& cands) {
  const RootCandidate* best = nullptr;
  for (const auto& c : cands) {
    if (c.decay >= 0.0) continue;
    if (!best || c.nonunimodular < best->nonunimodular) best = &c;
  }
  return best;
}

}  // namespace

Wavenumber::Wavenumber(Complex value) : value_(value) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
    throw InputError("wavenumber must be finite");
  if (value.imag() <= 0.0) throw InputError("wavenumber needs a strictly positive imaginary part");
  double re = std::abs(value.real());
  if (re <= 0.0 || re >= kBandEdge)
    throw InputError("|Re k| must lie in (0, 2*sqrt(2))");
}

Direction::Direction(double m, double n) : m_(m), n_(n) {
  if (!std::isfinite(m) || !std::isfinite(n)) throw InputError("direction components must be finite");
  if (m == 0.0 && n == 0.0) throw InputError("direction (0,0) is undefined");
}

Direction Direction::lattice(int m, int n) {
  if (m == 0 && n == 0) throw InputError("direction (0,0) is undefined");
  int g = std::gcd(std::abs(m), std::abs(n));
  return {static_cast<double>(m / g), static_cast<double>(n / g)};
}

Direction Direction::from_beta(double beta) {
  if (std::isnan(beta)) throw InputError("beta is NaN");
  if (std::isinf(beta)) return {beta > 0 ? 1.0 : -1.0, 0.0};
  return {beta, 1.0};
}

Direction Direction::from_angle(double theta) {
  if (!std::isfinite(theta)) throw InputError("angle must be finite");
  double c = std::cos(theta), s = std::sin(theta);
  if (std::abs(c) < 1e-15) c = 0.0;
  if (std::abs(s) < 1e-15) s = 0.0;
  return {c, s};
}

double Direction::beta() const {
  if (n_ == 0.0) return std::numeric_limits<double>::infinity();
  return m_ / n_;
}

double Direction::angle() const {
  double a = std::atan2(n_, m_);
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a;
}

double Direction::norm() const { return std::hypot(m_, n_); }

bool Direction::same_ray(const Direction& o, double tol) const {
  double a = norm(), b = o.norm();
  return std::abs(m_ / a - o.m_ / b) <= tol && std::abs(n_ / a - o.n_ / b) <= tol;
}

std::string Direction::str() const {
  char buf[80];
  std::snprintf(buf, sizeof buf, "(%.17g,%.17g)", m_, n_);
  return buf;
}

WaveRoots WaveRoots::reversed() const {
  WaveRoots r = *this;
  r.s = 1.0 / s;
  r.q = 1.0 / q;
  if (kind == RootKind::outgoing) r.kind = RootKind::incoming;
  else if (kind == RootKind::incoming) r.kind = RootKind::outgoing;
  return r;
}

Complex dispersion_residual(Complex s, Complex q, const Wavenumber& k) {
  return s + 1.0 / s + q + 1.0 / q + k.squared() - 4.0;
}

double incidence_residual(const WaveRoots& r) {
  Complex ds = r.s - 1.0 / r.s;
  Complex dq = r.q - 1.0 / r.q;
  double beta = r.beta();
  if (std::isinf(beta)) return std::abs(dq);
  if (std::abs(dq) == 0.0) return std::abs(ds);
  return std::abs(ds / dq - beta);
}

std::vector<RootCandidate> dispersion_candidates(const Direction& d, const Wavenumber& k) {
  const double nm = d.norm();
  const double dm = d.m() / nm, dn = d.n() / nm;
  const Complex k2 = k.squared();
  const Complex c = 4.0 - k2;

  // Eliminating q from the two equations leaves a quadratic in t = s + 1/s.
  const double a = dm * dm - dn * dn;
  const Complex b = -2.0 * dm * dm * c;
  const Complex cc = dm * dm * (c * c - 4.0) + 4.0 * dn * dn;
  std::vector<Complex> ts;
  if (std::abs(a) < 1e-14) {
    ts.push_back(-cc / b);
  } else {
    Complex disc = std::sqrt(b * b - 4.0 * a * cc);
    Complex qp = -0.5 * (b + disc), qm = -0.5 * (b - disc);
    Complex qq = std::abs(qp) >= std::abs(qm) ? qp : qm;
    ts.push_back(qq / a);
    ts.push_back(cc / qq);
  }

  std::vector<RootCandidate> out;
  for (Complex t : ts) {
    Complex s1 = reciprocal_pair_root(t);
    Complex q1 = reciprocal_pair_root(c - t);
    for (Complex s : {s1, 1.0 / s1}) {
      // q is fixed up to inversion; keep the one consistent with the direction.
      Complex best_q;
      double best = std::numeric_limits<double>::infinity();
      for (Complex q : {q1, 1.0 / q1}) {
        double res = std::abs(dm * (q - 1.0 / q) - dn * (s - 1.0 / s));
        double decay = dm * std::log(std::abs(s)) + dn * std::log(std::abs(q));
        // Ties (s - 1/s = 0 with dm = 0) resolve towards decay.
        if (res < best - 1e-12 || (std::abs(res - best) <= 1e-12 && decay < 0)) {
          best = res;
          best_q = q;
        }
      }
      Complex s_p = s, q_p = best_q;
      polish(s_p, q_p, dm, dn, k2);
      RootCandidate rc;
      rc.s = s_p;
      rc.q = q_p;
      rc.t = s_p + 1.0 / s_p;
      rc.decay = dm * std::log(std::abs(s_p)) + dn * std::log(std::abs(q_p));
      rc.nonunimodular = std::max(std::abs(std::log(std::abs(s_p))), std::abs(std::log(std::abs(q_p))));
      out.push_back(rc);
    }
  }
  return out;
}

WaveRoots solve_dispersion(const Direction& d, const Wavenumber& k) {
  auto cands = dispersion_candidates(d, k);
  const RootCandidate* pick = most_unimodular(cands);
  if (!pick) throw DomainError("no outgoing root for direction " + d.str());

  // Continuation check: with half the absorption the same branch must stay
  // the most unimodular one and move towards the unit torus.
  Wavenumber half(Complex(k.re(), 0.5 * k.im()));
  auto cands_half = dispersion_candidates(d, half);
  const RootCandidate* follow = nearest_t(cands_half, pick->t);
  const RootCandidate* best_half = most_unimodular(cands_half);
  if (!follow || follow != best_half || !(follow->nonunimodular < pick->nonunimodular ||
                                          pick->nonunimodular < 1e-14)) {
    throw NumericalError("ambiguous root classification for direction " + d.str());
  }

  WaveRoots r;
  r.s = pick->s;
  r.q = pick->q;
  r.kind = RootKind::outgoing;
  r.direction = d;
  if (std::abs(dispersion_residual(r.s, r.q, k)) > 1e-12 || incidence_residual(r) > 1e-10)
    throw NumericalError("dispersion roots failed the residual check for direction " + d.str());
  return r;
}

Complex ipow(Complex z, int e) {
  if (e == 0) return 1.0;
  if (e < 0) {
    z = 1.0 / z;
    e = -e;
  }
  Complex result = 1.0;
  while (true) {
    if (e & 1) result *= z;
    e >>= 1;
    if (!e) break;
    z *= z;
  }
  return result;
}

Complex plane_wave(const WaveRoots& r, Site site, int exponent_sign) {
  int sg = exponent_sign >= 0 ? 1 : -1;
  return ipow(r.s, sg * site.m) * ipow(r.q, sg * site.n);
}

Complex sample(const FieldSampler& field, Site site) {
  auto v = field(site);
  if (!v) throw InputError("field undefined at " + fmt_site(site));
  return *v;
}

Complex helmholtz_residual(const FieldSampler& field, Site site, const Wavenumber& k) {
  Complex sum = (k.squared() - 4.0) * sample(field, site);
  for (Site e : kAxisSteps) sum += sample(field, site + e);
  return sum;
}

Complex apply_embedding_operator(const FieldSampler& field, Site site, Complex s_in,
                                 EmbeddingOrder order) {
  if (order == EmbeddingOrder::H1)
    return sample(field, site) - sample(field, site + Site{-1, 0}) / s_in;
  return sample(field, site + Site{1, 0}) + sample(field, site + Site{-1, 0}) -
         (s_in + 1.0 / s_in) * sample(field, site);
}

}  // namespace latdiff
