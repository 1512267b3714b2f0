#pragma once

#include <functional>
#include <memory>

#include "latdiff/bae.hpp"

namespace latdiff {

// Roots of s^2 + d s + 1 for d1 = k^2 - 2 and d2 = k^2 - 6, labelled o
// (outside the unit circle) and i (inside). The printed radicals are used
// with principal square roots; labels are swapped once if they land on the
// wrong side.
struct HalfPlaneConstants {
  Complex d1, d2;
  Complex eta_o1, eta_i1, eta_o2, eta_i2;
  // sqrt(eta_o1 eta_o2) on the branch that makes the kernel equal
  // (q - 1/q) / 2 with |q| < 1 at s = 1.
  Complex root_product;
  bool relabelled = false;
};

HalfPlaneConstants halfplane_constants(const Wavenumber& k);

struct KernelValues {
  Complex upsilon;  // kernel
  Complex v_minus;  // analytic outside the unit circle
  Complex v_plus;   // analytic inside
  Complex c2;       // root_product * C1
};

// DomainError within 1e-12 of a branch point.
KernelValues kernel_and_transforms(Complex s, Complex C1, const HalfPlaneConstants& constants);
KernelValues kernel_and_transforms(Complex s, Complex C1, const Wavenumber& k);

// (1 / 2 pi i) times the integral of V-(s) s^(m-1) over the unit circle, by
// the trapezoidal rule.
Complex inverse_transform_minus(int m, Complex C1, const HalfPlaneConstants& constants, int nodes = 4096);

using DirectivityFn = std::function<Complex(const Direction&)>;

struct FlaggedValue {
  Complex value;
  bool pole = false;
};

// 1 - 1 / (s_a s_b)
Complex hat_factor(const WaveRoots& a, const WaveRoots& b);

// Half-plane: S(b, b_in) = S^(b, b1) S^(b_in, b1) / ((1 - 1/(s s_in)) S^(b1, b1)),
// S^(x, y) = (1 - 1/(s_x s_y)) S(x, y). S_aux is S(., b1).
FlaggedValue halfplane_embedding(const DirectivityFn& S_aux, const Direction& beta, const Direction& beta_in,
                                 const Direction& beta1, const Wavenumber& k);

// Strip, with b2 the mirror image of b1. An empty S_aux2 is replaced by
// S(b, b2) = S(-b, b1).
FlaggedValue strip_embedding(const DirectivityFn& S_aux1, const DirectivityFn& S_aux2, const Direction& beta,
                             const Direction& beta_in, const Direction& beta1, const Wavenumber& k);

// Right-angled wedge, formula as printed:
// [S~(b, b2) S~(b_in, b1) - S~(b, b1) S~(b_in, b2)] / [F(b, b_in) S~(b1, b2)]
// with F the modified-directivity factor. b2 must have beta = 1 / beta(b1).
Complex wedge_embedding(const DirectivityFn& S_aux1, const DirectivityFn& S_aux2, const Direction& beta,
                        const Direction& beta_in, const Direction& beta1, const Direction& beta2,
                        const Wavenumber& k);

// Strong embedding through the edge Green's function directivity:
// S(b, b_in) = -sqrt(eta_o1 eta_o2) S_edge(b_in) S_edge(b) / (1 - 1/(s s_in)).
FlaggedValue edge_strong_embedding(const DirectivityFn& S_edge, const Direction& beta, const Direction& beta_in,
                                   const Wavenumber& k);

// Edge Green's function of a truncated half-line {(m, 0) : 1 <= m <= length}
// with the unit source at (0, 0).
class TruncatedEdgeGreen {
 public:
  TruncatedEdgeGreen(int length, const Wavenumber& k, int threads = 0);

  Complex value_at_source() const { return v00_; }  // total field at (0, 0)
  Complex field(Site s) const;                        // total field
  Complex directivity(const Direction& d) const;      // 1 + S of the scattered part
  const ScatteringSolution& solution() const { return sol_; }

 private:
  std::shared_ptr<GreenTable> table_;
  ScatteringSolution sol_;
  Complex v00_;
};

}  // namespace latdiff
