#include <catch2/catch_amalgamated.hpp>

#include "cgoscatter/carleman.hpp"
#include "helpers.hpp"

using namespace cgs;

namespace {
Grid gc{512, 3.0};
SurfaceModel planeModel() { return SurfaceModel({ExtPoint::infinity()}, 2); }
Field bumpAt(const Grid& g, cplx c, double w) {
  return sample(g, [=](cplx z) { return std::exp(-std::norm(z - c) / (w * w)); });
}
} // namespace

TEST_CASE("carleman lhs basics") {
  MorsePhase P = constructPhase(cplx(0), planeModel(), 2);
  Field phi = P.phiField(gc);
  Field phi0 = phi0Field(gc, 2);
  Field phiEps = convexifiedWeight(phi, phi0, 0.05, 0.1);

  REQUIRE(carlemanLHS(Field(gc), phiEps, 0.1, 0.5, 2) == 0.0);

  // bump away from the critical point: the |dphi| term dominates, 1/h^2
  Field u = taper(bumpAt(gc, cplx(1.2, 0.4), 0.3), 0.7, 0.95);
  double l1 = carlemanLHS(u, phiEps, 0.1, 0.5, 2);
  double l2 = carlemanLHS(u, phiEps, 0.05, 0.5, 2);
  REQUIRE(l2 / l1 > 3.0);
  REQUIRE(l2 / l1 < 4.5);

  // bump at the critical point: still at least ||u||^2 / h
  Field up = taper(bumpAt(gc, cplx(0), 0.3), 0.7, 0.95);
  double h = 0.05;
  double n2 = std::pow(l2Norm(up), 2);
  REQUIRE(carlemanLHS(up, phiEps, h, 0.5, 2) >= n2 / h);
}

TEST_CASE("lhs and rhs are quadratic in u") {
  MorsePhase P = constructPhase(cplx(0), planeModel(), 2);
  Field phi = P.phiField(gc);
  Field phiEps = convexifiedWeight(phi, phi0Field(gc, 2), 0.05, 0.1);
  Field V = sample(gc, [](cplx z) { return -0.5 * std::exp(-std::norm(z)); });
  Field u = taper(bumpAt(gc, cplx(0.5, -0.3), 0.4), 0.7, 0.95);
  Field u3 = cplx(3.0, 0.0) * u;
  double l = carlemanLHS(u, phiEps, 0.05, 0.5, 2);
  double l3 = carlemanLHS(u3, phiEps, 0.05, 0.5, 2);
  REQUIRE(l3 == Catch::Approx(9.0 * l).epsilon(1e-12));
  double r = carlemanRHS(u, V, phiEps, 0.05, 1.0);
  double r3 = carlemanRHS(u3, V, phiEps, 0.05, 1.0);
  REQUIRE(r3 == Catch::Approx(9.0 * r).epsilon(1e-12));
}

TEST_CASE("conjugated operator two path agreement") {
  Grid g{256, 3.0};
  MorsePhase P = constructPhase(cplx(0), planeModel(), 2);
  Field phiEps = convexifiedWeight(P.phiField(g), phi0Field(g, 2), 0.5, 0.5);
  Field V = sample(g, [](cplx z) { return -0.3 * std::exp(-std::norm(z)); });
  Field u = taper(sample(g, [](cplx z) { return std::exp(-2.0 * std::norm(z)); }), 0.7, 0.95);
  double h = 0.5, lambda = 1.0;
  double expanded = carlemanRHS(u, V, phiEps, h, lambda);

  // direct conjugation with the exponentials, valid at this benign h
  Field eU(g);
  for (size_t i = 0; i < u.v.size(); ++i)
    eU.v[i] = std::exp(-phiEps.v[i].real() / h) * u.v[i];
  Field lap = laplacianPos(eU);
  double direct = 0;
  for (size_t i = 0; i < u.v.size(); ++i)
    direct += std::norm(std::exp(phiEps.v[i].real() / h) *
                        (lap.v[i] + (V.v[i] - lambda * lambda) * eU.v[i]));
  direct *= g.dx() * g.dx();
  REQUIRE(std::abs(expanded - direct) / direct < 1e-6);
}

TEST_CASE("quadratic growth sweep is h stable") {
  SurfaceModel M = planeModel();
  MorsePhase P = constructPhase(cplx(0), M, 2);
  Field V = sample(gc, [](cplx z) { return -0.8 * std::exp(-std::norm(z)); });
  CarlemanReport rep = carlemanSweep(M, gc, P, V, 1.0, 2, 0.5, 0.1,
                                     {0.05, 0.025, 0.0125}, 7);
  REQUIRE(rep.pass);
  REQUIRE(rep.stability <= 2.0);
  for (double c : rep.fittedC) REQUIRE(c > 0);

  // bounded potentials shift the fitted constant by a bounded factor
  Field zero(gc);
  CarlemanReport rep0 = carlemanSweep(M, gc, P, zero, 1.0, 2, 0.5, 0.1,
                                      {0.05, 0.025, 0.0125}, 7);
  double ratio = rep.fittedC[0] / rep0.fittedC[0];
  REQUIRE(ratio > 0.2);
  REQUIRE(ratio < 5.0);
}

TEST_CASE("h comparable to eps is flagged not thrown") {
  SurfaceModel M = planeModel();
  MorsePhase P = constructPhase(cplx(0), M, 2);
  Field V(gc);
  CarlemanReport rep = carlemanSweep(M, gc, P, V, 0.0, 2, 0.5, 0.1, {0.1, 0.05}, 3);
  REQUIRE(rep.fittedC.size() == 2); // outside the hypothesis; result reported
}

TEST_CASE("linear growth sweep on the two end model") {
  SurfaceModel M({ExtPoint::at(cplx(1, 0)), ExtPoint::infinity()}, 1);
  MorsePhase P = constructPhase(cplx(0), M, 1);
  Grid g{768, 10.0};
  Field V = sample(g, [](cplx z) {
    double cut = 1.0 - smoothStepDown(std::abs(z - cplx(1, 0)) / 0.6);
    return -0.5 * std::exp(-std::abs(z)) * cut;
  });
  CarlemanReport rep = carlemanSweep(M, g, P, V, 0.0, 1, 0.5, 0.1, {0.05, 0.025}, 11);
  REQUIRE(rep.stability <= 2.0);
  for (double c : rep.fittedC) REQUIRE(c > 0);
}
