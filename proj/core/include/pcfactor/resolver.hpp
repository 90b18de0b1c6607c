#pragma once

#include <vector>

#include "pcfactor/common.hpp"
#include "pcfactor/index_engine.hpp"
#include "pcfactor/monodromy.hpp"

namespace pcfactor {

struct ResolverConfig {
  double scan_radius = 5.0;
  int grid = 41;             // grid points per axis over the scan square
  double match_tol = tol::match;
  // Tighter than the general default: trace matching compares invariants
  // that can reach a few hundred, so the transport error must sit well
  // below match_tol after that amplification.
  IntegratorConfig integ{1e-11, 1e-13, 0.25, 0.0};
};

struct ResolverVerdict {
  bool extremal_confirmed = false;
  Cx parameter;               // best accessory parameter found
  double defect = 1e300;      // fingerprint defect at that parameter
  int evaluated = 0;          // grid points evaluated successfully
  int skipped = 0;            // grid points skipped after integrator errors
};

// Euclidean distance between the similarity fingerprints of two same-shape
// matrix tuples; zero exactly when all joint trace words up to length three
// agree.
double fingerprint_defect(const std::vector<Mat>& a, const std::vector<Mat>& b);

// Scans the one-parameter accessory family attached to the request for a
// parameter whose companion-system monodromy matches the target tuple. A
// match confirms the extremal index option; failure to match is not a proof
// of the balanced option. Honors PI_ENGINE_THREADS for the grid scan.
ResolverVerdict resolve(const ResolverRequest& req, const ResolverConfig& cfg = {});

}  // namespace pcfactor
