#ifndef SPECFUSE_REGULARIZERS_HPP
#define SPECFUSE_REGULARIZERS_HPP

#include "specfuse/core.hpp"

namespace specfuse {

struct DtvParams {
  Scalar gamma = 0.9995;   // direction strength, in [0, 1]
  Scalar epsilon = 0.003;  // smoothing of the normalization

  void validate() const {
    if (!(gamma >= 0 && gamma <= 1)) throw BadParams("DtvParams: gamma must be in [0,1]");
    if (!(epsilon > 0)) throw BadParams("DtvParams: epsilon must be > 0");
  }
};

// Inner-solver settings plus the warm-started dual field carried between
// outer iterations. One instance belongs to exactly one solver.
struct ProxConfig {
  int maxInnerIterations = 20;
  Scalar dualityTolerance = 0;  // 0 = always run the full budget
  Image dual1, dual2;           // per-pixel dual, |(dual1,dual2)_i| <= 1
};

VectorField buildVectorField(const Image& v, const DtvParams& params);

Image grayscale(const Rgb& rgb);

Scalar tv(const Image& u);
Scalar dtv(const Image& u, const VectorField& xi);

Image projectNonnegative(const Image& u);
Kernel projectSimplex(const Kernel& k);

// prox of tau*lambdaU*dTV(., xi) + indicator(. >= 0), solved in the dual with
// warm-started fast gradient projection. The output is nonnegative exactly.
Image proxDtvNonneg(const Image& y, Scalar tau, Scalar lambdaU, const VectorField& xi,
                    ProxConfig& cfg);

// prox of tau*lambdaK*TV + indicator(unit simplex); output lies in the simplex.
Kernel proxTvSimplex(const Kernel& y, Scalar tau, Scalar lambdaK, ProxConfig& cfg);

}  // namespace specfuse

#endif
