#include "ddinv/platoon.hpp"

namespace ddinv {

PlatoonModel make_platoon(const PlatoonParams& params) {
  Matrix Act(3, 3);
  Act << 0, 1, -1,
         0, -params.gamma1, 0,
         0, 0, -params.gamma2;
  Matrix Bct(3, 2);
  Bct << 0, 0,
         1, 0,
         0, 1;
  Matrix S3(3, 3);
  S3 << 0.9165, 0.1900, -0.1762,
        1.4250, 0.0661, -0.0769,
        -0.0322, 0.1925, 0.2165;
  Matrix SA(6, 3);
  SA << S3, -S3;
  Matrix D(6, 3);
  D << 1, 0, 0,
       -1, 0, 0,
       0, 1, 0,
       0, -1, 0,
       0, 0, 1,
       0, 0, -1;
  return {Matrix::Identity(3, 3) + params.tau * Act, params.tau * Bct,
          HPolyhedron(SA, Vector::Ones(6)), D};
}

ExperimentData generate_platoon_data(const PlatoonModel& model, Eigen::Index T, double delta,
                                     std::uint64_t seed, double input_bound) {
  return generate_experiment(model.A, model.B, Vector::Zero(model.A.rows()), T, seed, -input_bound,
                             input_bound, {model.D, delta}, false);
}

}  // namespace ddinv
