#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace latdiff {

using Complex = std::complex<double>;

// Lattice wavenumber with limiting absorption. |Re k| must lie inside the
// propagating band (0, 2*sqrt(2)) of the five-point stencil.
class Wavenumber {
 public:
  explicit Wavenumber(Complex value);
  Wavenumber(double re, double im) : Wavenumber(Complex(re, im)) {}

  Complex value() const { return value_; }
  Complex squared() const { return value_ * value_; }
  double re() const { return value_.real(); }
  double im() const { return value_.imag(); }

 private:
  Complex value_;
};

struct Site {
  int m = 0;
  int n = 0;

  friend auto operator<=>(const Site&, const Site&) = default;
  Site operator+(Site o) const { return {m + o.m, n + o.n}; }
  Site operator-(Site o) const { return {m - o.m, n - o.n}; }
};

struct SiteHash {
  std::size_t operator()(Site s) const noexcept {
    auto a = static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.m));
    auto b = static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.n));
    std::uint64_t h = (a << 32) ^ b;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

inline constexpr std::array<Site, 4> kAxisSteps = {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}};

// A ray direction (m, n) in the lattice plane. beta = m / n is the usual
// incidence parameter; the components keep the quadrant, so (1, 1) and
// (-1, -1) are different directions with the same beta.
class Direction {
 public:
  Direction(double m, double n);

  // Integer direction reduced by the gcd of its components.
  static Direction lattice(int m, int n);
  // (beta, 1) for finite beta, (1, 0) for infinite beta.
  static Direction from_beta(double beta);
  // (cos theta, sin theta), with components below 1e-15 snapped to zero.
  static Direction from_angle(double theta);

  double m() const { return m_; }
  double n() const { return n_; }
  double beta() const;   // +inf when n == 0
  double angle() const;  // atan2(n, m) mapped to [0, 2pi)
  double norm() const;

  Direction swapped() const { return {n_, m_}; }
  Direction mirrored() const { return {-m_, n_}; }

  bool same_ray(const Direction& other, double tol = 1e-12) const;

  std::string str() const;

 private:
  double m_;
  double n_;
};

enum class RootKind { outgoing, incoming, evanescent };

// Dispersion-consistent pair (s, q): s + 1/s + q + 1/q + k^2 - 4 = 0 and
// m (q - 1/q) = n (s - 1/s) for the stored direction.
struct WaveRoots {
  Complex s;
  Complex q;
  RootKind kind = RootKind::outgoing;
  Direction direction{0.0, 1.0};

  double beta() const { return direction.beta(); }
  WaveRoots reversed() const;  // (1/s, 1/q), outgoing <-> incoming
};

// Residuals used by the WaveRoots invariants.
Complex dispersion_residual(Complex s, Complex q, const Wavenumber& k);
double incidence_residual(const WaveRoots& roots);

// Every (s, q) pair on the dispersion curve compatible with the direction
// (the four roots of the quartic, paired with their q).
struct RootCandidate {
  Complex s;
  Complex q;
  Complex t;            // s + 1/s
  double decay;         // m log|s| + n log|q| for the unit direction
  double nonunimodular; // max(|log|s||, |log|q||)
};
std::vector<RootCandidate> dispersion_candidates(const Direction& d, const Wavenumber& k);

// Outgoing propagating roots: the pair whose wave s^m q^n decays along the
// ray and which tends to the unit torus as Im k -> 0.
WaveRoots solve_dispersion(const Direction& d, const Wavenumber& k);

// s^(sigma m) q^(sigma n).
Complex plane_wave(const WaveRoots& roots, Site site, int exponent_sign);

// Integer power by repeated squaring; exact site-to-site reproducibility.
Complex ipow(Complex z, int e);

using FieldSampler = std::function<std::optional<Complex>(Site)>;

Complex sample(const FieldSampler& field, Site site);  // InputError when undefined

// Five-point Laplacian plus k^2.
Complex helmholtz_residual(const FieldSampler& field, Site site, const Wavenumber& k);

enum class EmbeddingOrder { H1, H2 };

// H1: u(m,n) - u(m-1,n)/s_in.  H2: u(m+1,n) + u(m-1,n) - (s_in + 1/s_in) u(m,n).
Complex apply_embedding_operator(const FieldSampler& field, Site site, Complex s_in,
                                 EmbeddingOrder order);

}  // namespace latdiff
