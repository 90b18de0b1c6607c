#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "canonical_cases.hpp"
#include "doctest.h"
#include "pcfactor/common.hpp"
#include "pcfactor/fuchsian.hpp"
#include "pcfactor/linalg.hpp"
#include "pcfactor/monodromy.hpp"
#include "pcfactor/resolver.hpp"

using namespace pcfactor;

namespace {

// Planted four-point 2x2 request: the target tuple is the monodromy of the
// accessory family member at t0, so the scan must recover t0.
struct Planted {
  ResolverRequest req;
  Cx t0;
};

Planted plant_request(Rng& rng, Cx t0) {
  const double lo = strip_lo(1.2);
  std::vector<Cx> sing = default_singularities(4);
  std::vector<std::vector<Cx>> eps = draw_extremal_exponents(2, 4, 0, lo, rng);

  std::vector<std::vector<Cx>> payload(4);
  for (int k = 0; k < 4; ++k)
    payload[static_cast<std::size_t>(k)] = {eps[0][static_cast<std::size_t>(k)],
                                            eps[1][static_cast<std::size_t>(k)]};

  AccessoryFamily family = accessory_family(2, sing, payload);
  IntegratorConfig integ{1e-11, 1e-13, 0.25, 0.0};
  std::vector<LoopPath> loops = build_loops(sing, Cx(0.0, 0.0), integ);
  MonodromyTuple tuple = monodromy(companion_system(family.at(t0)), loops, integ);

  Planted out;
  out.t0 = t0;
  out.req.n = 2;
  out.req.m = 4;
  out.req.kappa = 2;
  out.req.option_a = {1, 1};
  out.req.option_b = {2, 0};
  out.req.exponents = payload;
  out.req.ms = tuple.chis;
  return out;
}

ResolverConfig quick_config() {
  ResolverConfig cfg;
  cfg.scan_radius = 2.0;
  cfg.grid = 21;
  return cfg;
}

}  // namespace

TEST_CASE("fingerprint defect is a faithful Euclidean distance") {
  Rng rng(301);
  std::vector<Mat> tuple = cases::generic_tuple_2(rng, 3, 1, strip_lo(1.2));
  CHECK(fingerprint_defect(tuple, tuple) == 0.0);

  std::vector<Mat> bumped = tuple;
  bumped[0](0, 0) += Cx(0.01, 0.0);
  double d = fingerprint_defect(tuple, bumped);
  CHECK(d > 0.0);

  std::vector<Cx> fa = similarity_fingerprint(tuple);
  std::vector<Cx> fb = similarity_fingerprint(bumped);
  double manual = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) manual += std::norm(fa[i] - fb[i]);
  CHECK(std::abs(d - std::sqrt(manual)) < 1e-12);

  std::vector<Mat> shorter(tuple.begin(), tuple.begin() + 2);
  try {
    fingerprint_defect(tuple, shorter);
    CHECK(false);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("resolver validates the request payload shape") {
  Rng rng(307);
  Planted planted = plant_request(rng, Cx(0.3, 0.1));
  ResolverRequest bad = planted.req;
  bad.ms.pop_back();
  try {
    resolve(bad, quick_config());
    CHECK(false);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("resolver recovers a planted accessory parameter") {
  setenv("PI_ENGINE_THREADS", "2", 1);
  Rng rng(311);
  Planted planted = plant_request(rng, Cx(0.3, 0.1));
  ResolverVerdict verdict = resolve(planted.req, quick_config());
  unsetenv("PI_ENGINE_THREADS");

  CHECK(verdict.extremal_confirmed);
  CHECK(std::abs(verdict.parameter - planted.t0) < 1e-4);
  CHECK(verdict.defect < 1e-7);
  CHECK(verdict.evaluated > 250);
  CHECK(verdict.skipped < 50);
}

TEST_CASE("resolver does not confirm an alien target tuple") {
  Rng rng(313);
  Planted planted = plant_request(rng, Cx(-0.4, 0.25));
  Rng other(317);
  planted.req.ms = cases::generic_tuple_2(other, 4, 2, strip_lo(1.2));

  ResolverVerdict verdict = resolve(planted.req, quick_config());
  CHECK_FALSE(verdict.extremal_confirmed);
  CHECK(verdict.defect > 1e-7);
}
