#pragma once

#include <cstdint>

#include "ddinv/dataset.hpp"
#include "ddinv/polyhedra.hpp"

namespace ddinv {

/// Two-vehicle platoon: state (distance, velocity 1, velocity 2), inputs
/// the two accelerations.
struct PlatoonParams {
  double gamma1 = 0.005;
  double gamma2 = 0.01;
  double tau = 0.01;
};

struct PlatoonModel {
  Matrix A;  // I + tau A_ct
  Matrix B;  // tau B_ct
  HPolyhedron S;
  Matrix D;  // [I; -I] with rows interleaved per coordinate
};

PlatoonModel make_platoon(const PlatoonParams& params = {});

/// generate_experiment from x(0) = 0 with inputs uniform on
/// [-input_bound, input_bound) and box disturbances of size delta.
ExperimentData generate_platoon_data(const PlatoonModel& model, Eigen::Index T, double delta,
                                     std::uint64_t seed, double input_bound = 5.0);

}  // namespace ddinv
