#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "latdiff/bae.hpp"
#include "latdiff/errors.hpp"

namespace latdiff {

std::optional<Complex> FieldGrid::at(Site s) const {
  if (!box_.contains(s)) return std::nullopt;
  const int h = box_.n1 - box_.n0 + 1;
  return values_[static_cast<std::size_t>(s.m - box_.m0) * static_cast<std::size_t>(h) +
                 static_cast<std::size_t>(s.n - box_.n0)];
}

Complex FieldGrid::operator()(Site s) const {
  auto v = at(s);
  if (!v) throw DomainError("site outside the oracle box");
  return *v;
}

FieldGrid solve_on_box(const GridBox& box, const std::function<std::optional<Complex>(Site)>& dirichlet,
                       const std::function<Complex(Site)>& source, const Wavenumber& k) {
  if (box.m1 - box.m0 < 2 || box.n1 - box.n0 < 2) throw ConfigError("oracle box is too small");
  const int w = box.m1 - box.m0 + 1, h = box.n1 - box.n0 + 1;
  const std::size_t total = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  auto flat = [&](Site s) {
    return static_cast<std::size_t>(s.m - box.m0) * static_cast<std::size_t>(h) + static_cast<std::size_t>(s.n - box.n0);
  };

  // Fixed values (rim and Dirichlet sites) are moved to the right-hand side.
  std::vector<Complex> values(total, 0.0);
  std::vector<int> unknown(total, -1);
  int count = 0;
  for (int m = box.m0; m <= box.m1; ++m)
    for (int n = box.n0; n <= box.n1; ++n) {
      Site s{m, n};
      if (box.on_rim(s)) continue;
      if (dirichlet) {
        if (auto v = dirichlet(s)) {
          values[flat(s)] = *v;
          continue;
        }
      }
      unknown[flat(s)] = count++;
    }

  using SpMat = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
  std::vector<Eigen::Triplet<Complex, int>> trip;
  trip.reserve(static_cast<std::size_t>(count) * 5);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(count);
  const Complex diag = k.squared() - 4.0;
  for (int m = box.m0; m <= box.m1; ++m)
    for (int n = box.n0; n <= box.n1; ++n) {
      Site s{m, n};
      int row = unknown[flat(s)];
      if (row < 0) continue;
      trip.emplace_back(row, row, diag);
      Complex r = source ? source(s) : Complex(0.0);
      for (Site e : kAxisSteps) {
        Site t = s + e;
        int col = unknown[flat(t)];
        if (col >= 0) trip.emplace_back(row, col, 1.0);
        else r -= values[flat(t)];
      }
      b(row) = r;
    }
  SpMat a(count, count);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse factorisation failed on the oracle box");
  Eigen::VectorXcd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse solve failed on the oracle box");
  for (std::size_t i = 0; i < total; ++i)
    if (unknown[i] >= 0) values[i] = x(unknown[i]);
  return FieldGrid(box, std::move(values));
}

FieldGrid oracle_grid_solve(const Obstacle& obstacle, const Incidence& incidence, const Wavenumber& k,
                            int box_radius) {
  Site lo = obstacle.bbox_min(), hi = obstacle.bbox_max();
  int cm = lo.m + (hi.m - lo.m) / 2, cn = lo.n + (hi.n - lo.n) / 2;
  GridBox box{cm - box_radius, cm + box_radius, cn - box_radius, cn + box_radius};
  int margin = std::min({lo.m - box.m0, box.m1 - hi.m, lo.n - box.n0, box.n1 - hi.n});
  if (margin < 5.0 / k.im())
    throw ConfigError("oracle box margin " + std::to_string(margin) + " is below 5/Im k = " +
                      std::to_string(5.0 / k.im()));
  return solve_on_box(
      box,
      [&](Site s) -> std::optional<Complex> {
        if (obstacle.contains(s)) return -incidence(s);
        return std::nullopt;
      },
      {}, k);
}

}  // namespace latdiff
