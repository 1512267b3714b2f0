#include <cmath>
#include <map>
#include <numbers>

#include "doctest.h"
#include "latdiff/canonical.hpp"
#include "latdiff/embedding.hpp"
#include "latdiff/errors.hpp"

using namespace latdiff;

namespace {

std::vector<Site> segment(int from, int to) {
  std::vector<Site> s;
  for (int m = from; m <= to; ++m) s.push_back({m, 0});
  return s;
}

// Directivities of one obstacle with solves cached per incidence.
class Scatterer {
 public:
  Scatterer(const std::vector<Site>& nodes, const Wavenumber& k)
      : k_(k), op_(std::make_shared<BoundaryOperator>(Obstacle(nodes), std::make_shared<GreenTable>(k), 1)) {}

  Complex S(const Direction& obs, const Direction& inc) {
    auto key = std::make_pair(inc.m(), inc.n());
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, solve_scattering(op_, Incidence::plane(solve_dispersion(inc, k_)))).first;
    return directivity(it->second, obs);
  }

  DirectivityFn aux(const Direction& inc) {
    return [this, inc](const Direction& d) { return S(d, inc); };
  }

 private:
  Wavenumber k_;
  std::shared_ptr<BoundaryOperator> op_;
  std::map<std::pair<double, double>, ScatteringSolution> cache_;
};

}  // namespace

TEST_CASE("half-plane constants") {
  for (Complex kv : {Complex(0.6, 0.1), Complex(0.6, 0.01), Complex(1.9, 0.05)}) {
    Wavenumber k(kv);
    HalfPlaneConstants c = halfplane_constants(k);
    CHECK(std::abs(c.eta_o1 * c.eta_i1 - 1.0) < 1e-14);
    CHECK(std::abs(c.eta_o2 * c.eta_i2 - 1.0) < 1e-14);
    CHECK(std::abs(c.eta_o1 + c.eta_i1 + c.d1) < 1e-14);
    CHECK(std::abs(c.eta_o2 + c.eta_i2 + c.d2) < 1e-14 * std::abs(c.d2));
    CHECK(std::abs(c.eta_o1) > 1.0);
    CHECK(std::abs(c.eta_o2) > 1.0);

    double worst = 0.0;
    for (int j = 0; j < 64; ++j) {
      Complex s = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / 64.0);
      KernelValues v = kernel_and_transforms(s, Complex(0.7, -0.2), c);
      worst = std::max(worst, std::abs(v.upsilon * v.v_minus - v.v_plus) / std::abs(v.v_plus));
    }
    CHECK(worst < 1e-12);

    // On s = 1 the kernel is (q - 1/q) / 2 for the decaying q.
    Complex b = 2.0 - k.squared();
    Complex q = 0.5 * (b - std::sqrt(b * b - 4.0));
    if (std::abs(q) > 1.0) q = 1.0 / q;
    CHECK(std::abs(kernel_and_transforms(1.0, 1.0, c).upsilon - 0.5 * (q - 1.0 / q)) < 1e-13);
  }
  Wavenumber k(0.6, 0.1);
  CHECK(std::abs(halfplane_constants(k).root_product - Complex(-2.3425459478173289, 0.76490863099065476)) < 1e-13);
  CHECK_THROWS_AS(kernel_and_transforms(halfplane_constants(k).eta_o1, 1.0, k), DomainError);
}

TEST_CASE("minus transform is analytic outside the circle") {
  Wavenumber k(0.6, 0.1);
  HalfPlaneConstants c = halfplane_constants(k);
  Complex C1(0.4, 1.1);
  CHECK(std::abs(inverse_transform_minus(0, C1, c) - C1) < 1e-13);
  for (int m = -1; m >= -4; --m) CHECK(std::abs(inverse_transform_minus(m, C1, c)) < 1e-13);
  CHECK(std::abs(inverse_transform_minus(2, C1, c)) > 1e-3);
}

TEST_CASE("half-plane embedding against a long segment") {
  Wavenumber k(0.6, 0.1);
  Scatterer hp(segment(0, 299), k);
  Direction b1(-1, 1.7);
  auto S1 = hp.aux(b1);
  // Rays pointing away from the truncated end.
  std::vector<Direction> ds = {Direction(-1, 1), Direction(-3, 1), Direction(-1, -0.5)};
  for (const auto& din : ds)
    for (const auto& dob : ds) {
      FlaggedValue v = halfplane_embedding(S1, dob, din, b1, k);
      REQUIRE_FALSE(v.pole);
      Complex d = hp.S(dob, din);
      CHECK(std::abs(v.value - d) < 1e-8 * std::abs(d));
    }
  Direction d(-1, 2);
  CHECK(halfplane_embedding(S1, d, d.mirrored(), b1, k).pole);
}

TEST_CASE("strip embedding is exact for a finite strip") {
  Wavenumber k(0.6, 0.01);
  Scatterer strip(segment(-10, 10), k);
  Direction b1(0.4, 1);
  auto S1 = strip.aux(b1), S2 = strip.aux(b1.mirrored());
  double worst = 0.0, worst_mirror = 0.0;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      Direction dob = Direction::from_angle(2.0 * std::numbers::pi * (i + 0.37) / 12.0);
      Direction din = Direction::from_angle(2.0 * std::numbers::pi * (j + 0.81) / 12.0);
      FlaggedValue v = strip_embedding(S1, S2, dob, din, b1, k);
      FlaggedValue w = strip_embedding(S1, {}, dob, din, b1, k);
      if (v.pole) continue;
      Complex d = strip.S(dob, din);
      worst = std::max(worst, std::abs(v.value - d) / std::abs(d));
      worst_mirror = std::max(worst_mirror, std::abs(w.value - d) / std::abs(d));
    }
  CHECK(worst < 1e-10);
  CHECK(worst_mirror < 1e-10);
}

TEST_CASE("mirror symmetry of a symmetric rectangle") {
  Wavenumber k(0.6, 0.01);
  std::vector<Site> nodes;
  for (int m = -20; m <= 20; ++m)
    for (int n = -1; n <= 1; ++n) nodes.push_back({m, n});
  Scatterer r(nodes, k);
  Direction b1(0.7, 1);
  for (Direction d : {Direction(1, 3), Direction(-2, 1), Direction(0.5, -1)}) {
    Complex a = r.S(d, b1.mirrored()), b = r.S(d.mirrored(), b1);
    CHECK(std::abs(a - b) < 1e-10 * std::abs(a));
  }
}

TEST_CASE("printed wedge combination has the opposite sign") {
  Wavenumber k(0.6, 0.2);
  std::vector<Site> nodes = segment(0, 149);
  for (int n = -1; n >= -149; --n) nodes.push_back({0, n});
  Scatterer wedge(nodes, k);
  Direction b1(-1, 2.5), b2(-2.5, 1);  // reflection (m, n) -> (-n, -m)
  auto S1 = wedge.aux(b1), S2 = wedge.aux(b2);
  std::vector<Direction> ds = {Direction(-1, 1), Direction(-3, 1), Direction(-1, 3), Direction(-0.2, 1)};
  for (const auto& din : ds)
    for (const auto& dob : ds) {
      if (dob.same_ray(din)) continue;
      Complex v = wedge_embedding(S1, S2, dob, din, b1, b2, k);
      Complex d = wedge.S(dob, din);
      CHECK(std::abs(v + d) < 1e-6 * std::abs(d));
    }
  CHECK_THROWS_AS(wedge_embedding(S1, S2, ds[0], ds[1], b1, Direction(1, 1), k), InputError);
}

TEST_CASE("truncated edge Green's function") {
  Wavenumber k(0.6, 0.1);
  TruncatedEdgeGreen e(401, k, 1);
  Complex root = halfplane_constants(k).root_product;
  CHECK(std::abs(e.value_at_source() * root - 1.0) < 1e-6);

  // Same problem on a finite box.
  GridBox box{-120, 521, -120, 120};
  FieldGrid grid = solve_on_box(
      box,
      [](Site s) -> std::optional<Complex> {
        if (s.n == 0 && s.m >= 1 && s.m <= 401) return Complex(0.0);
        return std::nullopt;
      },
      [](Site s) { return s == Site{0, 0} ? Complex(1.0) : Complex(0.0); }, k);
  double scale = std::abs(e.value_at_source());
  for (Site s : {Site{0, 0}, Site{-5, 3}, Site{10, 4}, Site{200, -6}})
    CHECK(std::abs(grid(s) - e.field(s)) < 1e-8 * scale);
}

TEST_CASE("strong edge embedding") {
  Wavenumber k(0.6, 0.1);
  TruncatedEdgeGreen e(400, k, 1);
  DirectivityFn Se = [&](const Direction& d) { return e.directivity(d); };
  Scatterer hp(segment(0, 400), k);
  Complex root = halfplane_constants(k).root_product;
  for (auto [din, dob] : std::vector<std::pair<Direction, Direction>>{
           {Direction(-1, 1), Direction(-3, 1)}, {Direction(-1, 2), Direction(-2, 1)},
           {Direction(-1, 0.3), Direction(-1, -0.5)}}) {
    FlaggedValue v = edge_strong_embedding(Se, dob, din, k);
    REQUIRE_FALSE(v.pole);
    Complex d = hp.S(dob, din);
    CHECK(std::abs(v.value - d) < 1e-8 * std::abs(d));
    // Twice the root product overshoots by exactly a factor two.
    WaveRoots r = solve_dispersion(dob, k), rin = solve_dispersion(din, k);
    Complex doubled = -2.0 * root * Se(din) * Se(dob) / hat_factor(r, rin);
    CHECK(std::abs(doubled / d - 2.0) < 1e-8);
  }
}
