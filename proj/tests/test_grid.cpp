#include <doctest.h>

#include <Eigen/Dense>

#include "inertia/errors.hpp"
#include "inertia/grid.hpp"
#include "support/test_grids.hpp"

using inertia::Bus;
using inertia::GridModel;
using inertia::WeightedEdge;

namespace {

Bus bus(int id, double d = 1.0, double lo = 1.0, double hi = 10.0) {
  Bus b;
  b.id = id;
  b.damping = d;
  b.inertia_floor = lo;
  b.inertia_cap = hi;
  b.disturbance_weight = 1.0;
  b.freq_penalty = 1.0;
  return b;
}

WeightedEdge edge(int from, int to, double w) { return {from, to, w}; }

}  // namespace

TEST_CASE("laplacian of a single edge") {
  const GridModel g = GridModel::build({bus(1), bus(2)}, {edge(1, 2, 1.0)});
  Eigen::Matrix2d expected;
  expected << 1, -1, -1, 1;
  CHECK((g.laplacian() - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("laplacian of a unit triangle") {
  const GridModel g = GridModel::build(
      {bus(1), bus(2), bus(3)},
      {edge(1, 2, 1.0), edge(2, 3, 1.0), edge(1, 3, 1.0)});
  const Eigen::MatrixXd& l = g.laplacian();
  for (int i = 0; i < 3; ++i) CHECK(l(i, i) == doctest::Approx(2.0));
  CHECK(l(0, 1) == doctest::Approx(-1.0));
  CHECK(l(0, 2) == doctest::Approx(-1.0));
  CHECK(l(1, 2) == doctest::Approx(-1.0));
}

TEST_CASE("laplacian of a weighted path") {
  const GridModel g = GridModel::build({bus(1), bus(2), bus(3)},
                                       {edge(1, 2, 2.0), edge(2, 3, 3.0)});
  Eigen::Matrix3d expected;
  expected << 2, -2, 0, -2, 5, -3, 0, -3, 3;
  CHECK((g.laplacian() - expected).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
}

TEST_CASE("laplacian invariants: symmetry, zero row sums, PSD") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = testgrids::random_instance(seed);
    const Eigen::MatrixXd& l = inst.grid.laplacian();
    CHECK((l - l.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((l * Eigen::VectorXd::Ones(l.rows())).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("negative susceptance is rejected") {
  CHECK_THROWS_AS(GridModel::build({bus(1), bus(2)}, {edge(1, 2, -0.5)}),
                  inertia::ModelError);
}

TEST_CASE("disconnected retained graph is rejected") {
  CHECK_THROWS_AS(
      GridModel::build({bus(1), bus(2), bus(3), bus(4)},
                       {edge(1, 2, 1.0), edge(3, 4, 1.0)}),
      inertia::ModelError);
}

TEST_CASE("kron reduction with empty passive set leaves L unchanged") {
  const GridModel full = GridModel::build(
      {bus(1), bus(2), bus(3)}, {edge(1, 2, 2.0), edge(2, 3, 3.0)});
  const Eigen::MatrixXd reduced = inertia::kron_reduce(full.laplacian(), {});
  CHECK((reduced - full.laplacian()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("kron reduction of a series path gives b1 b2 / (b1 + b2)") {
  const GridModel g =
      GridModel::build({bus(1), bus(2), bus(3)},
                       {edge(1, 2, 1.0), edge(2, 3, 1.0)}, {2});
  CHECK(g.size() == 2);
  CHECK(g.laplacian()(0, 1) == doctest::Approx(-0.5));
  CHECK(g.laplacian()(0, 0) == doctest::Approx(0.5));
  // Heterogeneous series weights follow the same formula.
  const GridModel h =
      GridModel::build({bus(1), bus(2), bus(3)},
                       {edge(1, 2, 2.0), edge(2, 3, 3.0)}, {2});
  CHECK(h.laplacian()(0, 1) == doctest::Approx(-(2.0 * 3.0) / 5.0));
}

TEST_CASE("kron reduction of a star gives a complete graph with equal weights") {
  const GridModel g = GridModel::build(
      {bus(1), bus(2), bus(3), bus(4)},
      {edge(4, 1, 1.0), edge(4, 2, 1.0), edge(4, 3, 1.0)}, {4});
  CHECK(g.size() == 3);
  const Eigen::MatrixXd& l = g.laplacian();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(l(i, j) == doctest::Approx(-1.0 / 3.0));
  // Still a Laplacian.
  CHECK((l * Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kron reduction rejects eliminating every bus") {
  const Eigen::MatrixXd l =
      GridModel::build({bus(1), bus(2)}, {edge(1, 2, 1.0)}).laplacian();
  CHECK_THROWS_AS(inertia::kron_reduce(l, {0, 1}), inertia::ModelError);
}

TEST_CASE("retained indexing survives reduction") {
  const GridModel g = GridModel::build(
      {bus(1), bus(7), bus(9)}, {edge(1, 7, 1.0), edge(7, 9, 1.0)}, {7});
  CHECK(g.size() == 2);
  CHECK(g.original_id(0) == 1);
  CHECK(g.original_id(1) == 9);
  CHECK(g.index_of(9) == 1);
  CHECK_THROWS_AS(g.index_of(7), inertia::ModelError);   // passive
  CHECK_THROWS_AS(g.index_of(42), inertia::ModelError);  // unknown
}

TEST_CASE("bus invariants are validated") {
  Bus bad = bus(1);
  bad.damping = 0.0;
  CHECK_THROWS_AS(GridModel::build({bad, bus(2)}, {edge(1, 2, 1.0)}),
                  inertia::ModelError);
  bad = bus(1);
  bad.inertia_floor = -1.0;
  CHECK_THROWS_AS(GridModel::build({bad, bus(2)}, {edge(1, 2, 1.0)}),
                  inertia::ModelError);
  bad = bus(1);
  bad.inertia_cap = 0.5;  // below the floor of 1.0
  CHECK_THROWS_AS(GridModel::build({bad, bus(2)}, {edge(1, 2, 1.0)}),
                  inertia::ModelError);
  bad = bus(1);
  bad.disturbance_weight = -0.1;
  CHECK_THROWS_AS(GridModel::build({bad, bus(2)}, {edge(1, 2, 1.0)}),
                  inertia::ModelError);
}

TEST_CASE("duplicate ids and dangling edges are rejected") {
  CHECK_THROWS_AS(GridModel::build({bus(1), bus(1)}, {edge(1, 1, 1.0)}),
                  inertia::ModelError);
  CHECK_THROWS_AS(GridModel::build({bus(1), bus(2)}, {edge(1, 3, 1.0)}),
                  inertia::ModelError);
}
