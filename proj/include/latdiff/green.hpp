#pragma once

#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "latdiff/lattice.hpp"

namespace latdiff {

// Sorted absolute indices: (min(|m|,|n|), max(|m|,|n|)).
Site canonical_site(Site site);

struct QuadratureResult {
  Complex value;
  int nodes = 0;
};

// Trapezoidal rule with a fixed node count on the deformed circle
// theta = x - i a sin x. Used directly by convergence tests.
Complex green_trapezoid(Site site, const Wavenumber& k, int nodes);

// Node doubling from 512 until the change is below 1e-13 relative (with a
// roundoff floor set by the integrand magnitude); at most 2^20 nodes.
QuadratureResult green_quadrature(Site site, const Wavenumber& k);

// Free lattice Green's function G(m, n) with the unit source at the origin:
// (Delta + k^2) G = delta. Values are cached per canonical site and the cache
// may be read and filled from several threads at once.
class GreenTable {
 public:
  explicit GreenTable(const Wavenumber& k);

  const Wavenumber& k() const { return k_; }

  Complex value(Site site) const;
  Complex operator()(Site site) const { return value(site); }
  int nodes(Site site) const;  // quadrature nodes of a cached entry, 0 if absent
  std::size_t size() const;

  // Computes all missing entries for the given sites in parallel.
  void prefetch(const std::vector<Site>& sites, int threads = 0) const;

 private:
  struct Entry {
    Complex value;
    int nodes;
  };

  Wavenumber k_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<Site, Entry, SiteHash> cache_;
};

Complex green(Site site, const Wavenumber& k, const GreenTable& table);

struct SaddleData {
  WaveRoots roots;
  Complex phi_second;  // d^2/ds^2 of m log s + n log q(s), unit direction
  double phi0 = 0.0;   // (pi - arg phi'') / 2
  bool swapped = false;  // true when parametrised by q (|n| < |m|)
  Complex k_squared;
};

SaddleData saddle_data(const Direction& direction, const Wavenumber& k);

// phi(z) - phi(z_saddle) along the dispersion curve, for finite-difference
// checks. z is s (or q when swapped) and the partner root follows the branch
// through the saddle.
Complex saddle_phase(const SaddleData& saddle, Complex z);

// Far-field asymptotic g of G at distance N along the direction:
// G(m, n) = g(m, n) (1 + O(1/N)).
Complex green_asymptotic(const Direction& direction, double N, const Wavenumber& k);
Complex green_asymptotic(Site site, const Wavenumber& k);

}  // namespace latdiff
