#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gtsim/graph.hpp"
#include "gtsim/mixing.hpp"

using namespace gtsim;

TEST_CASE("two-node path gives the uniform 2x2 matrix") {
  const MixingMatrix w = metropolis_weights(Graph(2, {{0, 1}}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(w.w()(i, j) == 0.5);
}

TEST_CASE("star n=3 weights follow the max-degree rule") {
  // deg(hub)=2, deg(leaf)=1: edge weight 1/3, hub self 1/3, leaf self 2/3.
  const MixingMatrix w = metropolis_weights(build_graph(GraphKind::star, 3));
  CHECK(w.w()(0, 1) == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK(w.w()(0, 2) == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK(w.w()(0, 0) == Catch::Approx(1.0 / 3.0).margin(1e-15));
  CHECK(w.w()(1, 1) == Catch::Approx(2.0 / 3.0).margin(1e-15));
  CHECK(w.w()(2, 2) == Catch::Approx(2.0 / 3.0).margin(1e-15));
  CHECK(w.w()(1, 2) == 0.0);
  const MixingValidation v = validate_mixing(w.w(), 1e-12);
  CHECK(v.pass);
}

TEST_CASE("ring n=3 is the uniform matrix") {
  const MixingMatrix w = metropolis_weights(build_graph(GraphKind::ring, 3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(w.w()(i, j) == Catch::Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("every family passes validation at 1e-12 for n up to 100") {
  for (std::size_t n = 2; n <= 100; ++n) {
    for (GraphKind kind : {GraphKind::ring, GraphKind::star, GraphKind::complete}) {
      const MixingMatrix w = metropolis_weights(build_graph(kind, n));
      const MixingValidation v = validate_mixing(w.w(), 1e-12);
      INFO(to_string(kind) << " n=" << n);
      CHECK(v.pass);
      // zero pattern off the edge set
      const Graph g = build_graph(kind, n);
      Matrix adj(n, n);
      for (auto [i, j] : g.edges()) adj(i, j) = adj(j, i) = 1.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j && adj(i, j) == 0.0) CHECK(w.w()(i, j) == 0.0);
      // Perron eigenvalue 1, lambda < 1 for connected graphs
      CHECK(std::abs(w.eigenvalues().front() - 1.0) <= 1e-12);
      CHECK(w.lambda() < 1.0);
      CHECK(w.lambda_bar() == (1.0 + w.lambda()) / 2.0);
    }
  }
  for (std::size_t side = 2; side <= 10; ++side) {
    const MixingMatrix w = metropolis_weights(build_graph(GraphKind::grid2d, side * side));
    CHECK(validate_mixing(w.w(), 1e-12).pass);
  }
}

TEST_CASE("spectrum examples") {
  Matrix uniform(4, 4, 0.25);
  const SpectrumInfo s = spectrum(uniform);
  CHECK(s.eigenvalues[0] == Catch::Approx(1.0).margin(1e-13));
  CHECK(s.lambda < 1e-12);
  CHECK(s.lambda_bar == Catch::Approx(0.5).margin(1e-12));

  const SpectrumInfo id = spectrum(Matrix::identity(3));
  CHECK(id.lambda == 1.0);

  Matrix asym(2, 2);
  asym(0, 1) = 0.5;
  asym(1, 0) = 0.25;
  CHECK_THROWS_AS(spectrum(asym), SpectrumError);
}

TEST_CASE("metropolis ring n=25 matches the circulant closed form") {
  const MixingMatrix w = metropolis_weights(build_graph(GraphKind::ring, 25));
  const double expect = (1.0 + 2.0 * std::cos(2.0 * std::numbers::pi / 25.0)) / 3.0;
  CHECK(w.lambda() == Catch::Approx(expect).margin(1e-10));
}

TEST_CASE("lambda ordering across families at n = 25") {
  const double l_complete = metropolis_weights(build_graph(GraphKind::complete, 25)).lambda();
  const double l_grid = metropolis_weights(build_graph(GraphKind::grid2d, 25)).lambda();
  const double l_star = metropolis_weights(build_graph(GraphKind::star, 25)).lambda();
  const double l_ring = metropolis_weights(build_graph(GraphKind::ring, 25)).lambda();
  CHECK(l_complete < 1e-12);
  CHECK(l_complete < l_grid);
  CHECK(l_grid < l_star);
  CHECK(l_star < l_ring);
  CHECK(l_ring < 1.0);
}

TEST_CASE("validation report quantifies defects") {
  CHECK(validate_mixing(Matrix::identity(5), 1e-12).pass);

  // scaling one row by 1.01 shows up as a 0.01 row-sum defect (and breaks symmetry)
  MixingMatrix w = metropolis_weights(build_graph(GraphKind::ring, 6));
  Matrix broken = w.w();
  for (std::size_t j = 0; j < 6; ++j) broken(2, j) *= 1.01;
  const MixingValidation v = validate_mixing(broken, 1e-12);
  CHECK_FALSE(v.pass);
  CHECK(v.row_sum_defect == Catch::Approx(0.01).margin(1e-12));

  Matrix negative = Matrix::identity(3);
  negative(0, 1) = negative(1, 0) = -0.25;
  const MixingValidation vn = validate_mixing(negative, 1e-12);
  CHECK(vn.negativity_defect == Catch::Approx(0.25).margin(0.0));
  CHECK_FALSE(vn.pass);
}

TEST_CASE("spectral decomposition reconstructs W") {
  for (GraphKind kind : {GraphKind::ring, GraphKind::star, GraphKind::grid2d}) {
    const MixingMatrix w = metropolis_weights(build_graph(kind, 25));
    const EigenDecomposition d = jacobi_eigen(w.w());
    Matrix rec(25, 25);
    for (std::size_t i = 0; i < 25; ++i)
      for (std::size_t j = 0; j < 25; ++j)
        for (std::size_t k = 0; k < 25; ++k)
          rec(i, j) += d.eigenvectors(i, k) * d.eigenvalues[k] * d.eigenvectors(j, k);
    CHECK(max_abs_diff(rec, w.w()) <= 1e-10);
  }
}
