#include <doctest.h>

#include <Eigen/Dense>

#include "mlabel/embedding.hpp"
#include "mlabel/metric.hpp"
#include "mlabel/regularizer.hpp"
#include "oracles.hpp"

using namespace mlabel;

TEST_SUITE_BEGIN("potentials");

TEST_CASE("metric validation") {
  CHECK(std::holds_alternative<Metric>(validate_metric(potts_metric(3).distances)));

  Eigen::MatrixXd bad(2, 2);
  bad << 0, 1, 2, 0;
  auto r = validate_metric(bad);
  REQUIRE(std::holds_alternative<MetricViolation>(r));
  auto v = std::get<MetricViolation>(r);
  CHECK(v.axiom == MetricAxiom::Symmetry);
  CHECK(v.i == 0);
  CHECK(v.j == 1);

  // truncated |i-j| at 2 satisfies the triangle inequality; cross-check by brute force
  Eigen::MatrixXd trunc(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) trunc(i, j) = std::min(2, std::abs(i - j));
  CHECK(std::holds_alternative<Metric>(validate_metric(trunc)));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) CHECK(trunc(i, k) <= trunc(i, j) + trunc(j, k) + 1e-12);

  Eigen::MatrixXd diag(2, 2);
  diag << 0.5, 1, 1, 0;
  CHECK(std::get<MetricViolation>(validate_metric(diag)).axiom == MetricAxiom::ZeroDiagonal);

  Eigen::MatrixXd zero_off(2, 2);
  zero_off << 0, 0, 0, 0;
  CHECK(std::get<MetricViolation>(validate_metric(zero_off)).axiom == MetricAxiom::Positivity);

  Eigen::MatrixXd tri(3, 3);
  tri << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  auto t = validate_metric(tri);
  CHECK(std::get<MetricViolation>(t).axiom == MetricAxiom::Triangle);
}

TEST_CASE("named potentials") {
  Metric p3 = potts_metric(3);
  Eigen::MatrixXd expect(3, 3);
  expect << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  CHECK((p3.distances - expect).norm() == 0.0);

  Metric lin = linear_metric(1.0, 3);
  expect << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  CHECK((lin.distances - expect).norm() == 0.0);

  Metric tl = truncated_linear_metric(std::sqrt(2.0) / 8.0, 16, 64);
  CHECK(tl(0, 63) == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(tl(0, 8) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("alpha_d") {
  CHECK(alpha_d(potts_metric(4)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(alpha_d(potts_metric(2)) == doctest::Approx(1.0));
  CHECK(alpha_d(linear_metric(1.0, 3)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("exact embeddings") {
  EmbeddingMatrix p2 = exact_embedding_potts(2);
  CHECK(p2.k() == 2);
  CHECK(p2.pair_distance(0, 1) == doctest::Approx(1.0));
  CHECK(p2.eps_e == 0.0);

  EmbeddingMatrix lin = exact_embedding_linear(1.0, 3);
  CHECK(lin.k() == 1);
  CHECK(lin.A(0, 0) == doctest::Approx(1.0));
  CHECK(lin.A(0, 2) == doctest::Approx(3.0));
  CHECK(lin.pair_distance(0, 2) == doctest::Approx(2.0));

  EmbeddingMatrix lin2 = exact_embedding_linear(2.0, 2);
  CHECK(lin2.pair_distance(0, 1) == doctest::Approx(2.0 * lin.pair_distance(0, 1)));

  // distances match the named metrics exactly
  for (int l = 2; l <= 8; ++l) {
    EmbeddingMatrix e = exact_embedding_potts(l);
    CHECK(max_distance_error(e.A, potts_metric(l).distances) <= 1e-12);
  }
  CHECK(max_distance_error(lin.A, linear_metric(1.0, 3).distances) <= 1e-12);
}

TEST_CASE("classical scaling") {
  SUBCASE("Potts l=2: rank one, distance preserved") {
    EmbeddingMatrix e = classical_scaling_embed(potts_metric(2));
    CHECK(e.k() == 1);
    CHECK(e.pair_distance(0, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(e.eps_e <= 1e-10);
  }

  SUBCASE("Euclidean metrics are reproduced") {
    for (int l = 2; l <= 8; ++l) {
      EmbeddingMatrix e = classical_scaling_embed(potts_metric(l));
      CHECK(e.eps_e <= 1e-8);
      // recompute the stored error independently
      CHECK(max_distance_error(e.A, potts_metric(l).distances) ==
            doctest::Approx(e.eps_e).epsilon(1e-12));
    }
    EmbeddingMatrix lin = classical_scaling_embed(linear_metric(0.7, 5));
    CHECK(lin.eps_e <= 1e-8);
  }

  SUBCASE("non-Euclidean metric reports its error") {
    Metric tl = truncated_linear_metric(1.0, 2.0, 5);
    EmbeddingMatrix e = classical_scaling_embed(tl);
    CHECK(e.eps_e > 0.0);
    CHECK(e.eps_e == doctest::Approx(max_distance_error(e.A, tl.distances)));
    // distances within eps_e by construction of the stored bound
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j) CHECK(std::abs(e.pair_distance(i, j) - tl(i, j)) <= e.eps_e + 1e-12);
  }
}

TEST_CASE("psi_euclidean") {
  EmbeddingMatrix e = exact_embedding_potts(3);
  CHECK(psi_euclidean(Eigen::MatrixXd::Zero(2, 3), e) == 0.0);

  // rank-one block y (e^i - e^j)^T with unit y recovers the distance
  Eigen::VectorXd y(2);
  y << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  Eigen::VectorXd diff = Eigen::VectorXd::Zero(3);
  diff(0) = 1;
  diff(2) = -1;
  Eigen::MatrixXd z = y * diff.transpose();
  CHECK(psi_euclidean(z, e) == doctest::Approx(1.0));
  CHECK(psi_euclidean(2.0 * z, e) == doctest::Approx(2.0));

  // subadditivity on random pairs
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    Eigen::MatrixXd z1 = oracle::random_matrix(rng, 2, 3);
    Eigen::MatrixXd z2 = oracle::random_matrix(rng, 2, 3);
    CHECK(psi_euclidean(z1 + z2, e) <= psi_euclidean(z1, e) + psi_euclidean(z2, e) + 1e-10);
  }

  CHECK_THROWS_AS(psi_euclidean(Eigen::MatrixXd::Zero(2, 4), e), std::invalid_argument);
}

TEST_CASE("psi envelope lower bound") {
  Metric p3 = potts_metric(3);
  PsiBudget budget;
  budget.iters = 200;
  budget.dykstra_tol = 1e-10;
  budget.dykstra_cap = 2000;

  CHECK(psi_envelope_lower_bound(Eigen::MatrixXd::Zero(2, 3), p3, budget) == 0.0);

  SUBCASE("recovers pairwise distances on rank-one blocks") {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 3);
        z(0, i) = 1;
        z(0, j) = -1;
        const double got = psi_envelope_lower_bound(z, p3, budget);
        CHECK(got == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(got <= 1.0 + 1e-6);
      }
  }

  SUBCASE("bounds never decrease and respect Cauchy-Schwarz") {
    Rng rng(71);
    const double ad = alpha_d(p3);
    for (int t = 0; t < 20; ++t) {
      Eigen::MatrixXd z = oracle::random_matrix(rng, 2, 3);
      std::vector<double> trace;
      const double bound = psi_envelope_lower_bound(z, p3, budget, &trace);
      // nondecreasing up to the inexactness of the Dykstra projections
      for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1] - 1e-8);
      CHECK(bound <= ad * z.norm() + 1e-8);
      CHECK(bound >= 0.0);
    }
  }

  SUBCASE("monotone under the metric scaling used for lambda") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 3);
    z(0, 0) = 1;
    z(0, 1) = -1;
    const double base = psi_envelope_lower_bound(z, p3, budget);
    const double scaled = psi_envelope_lower_bound(z, p3.scaled(2.5), budget);
    CHECK(scaled == doctest::Approx(2.5 * base).epsilon(1e-6));
  }
}

TEST_CASE("psi_bar distances for binarization") {
  // the linear-metric example: u = (1/3+d, 1/3, 1/3-d)
  RegularizerSpec lin = RegularizerSpec::euclidean(exact_embedding_linear(1.0, 3));
  const double delta = 0.01;
  Eigen::VectorXd u(3);
  u << 1.0 / 3 + delta, 1.0 / 3, 1.0 / 3 - delta;
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(3, 0), e2 = Eigen::VectorXd::Unit(3, 1),
                  e3 = Eigen::VectorXd::Unit(3, 2);
  CHECK(psi_bar(u - e1, lin) == doctest::Approx(std::abs(1 - 2 * delta)));
  CHECK(psi_bar(u - e2, lin) == doctest::Approx(std::abs(2 * delta)));
  CHECK(psi_bar(u - e3, lin) == doctest::Approx(std::abs(1 + 2 * delta)));

  // envelope route approaches the same value for the Potts metric
  RegularizerSpec env = RegularizerSpec::envelope(potts_metric(3));
  PsiBudget budget;
  budget.iters = 300;
  budget.dykstra_tol = 1e-10;
  budget.dykstra_cap = 2000;
  Eigen::VectorXd step = e1 - e2;
  CHECK(psi_bar(step, env, budget) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_SUITE_END();
