#include "specfuse/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace specfuse {

VectorField buildVectorField(const Image& v, const DtvParams& params) {
  params.validate();
  requireFinite(v, "buildVectorField");
  const GradientField g = gradient(v);
  const Image normEps = (g.d1 * g.d1 + g.d2 * g.d2 + params.epsilon * params.epsilon).sqrt();
  VectorField xi;
  xi.gamma = params.gamma;
  xi.x1 = params.gamma * g.d1 / normEps;
  xi.x2 = params.gamma * g.d2 / normEps;
  return xi;
}

Image grayscale(const Rgb& rgb) {
  if (rgb.r.rows() != rgb.g.rows() || rgb.r.cols() != rgb.g.cols() ||
      rgb.r.rows() != rgb.b.rows() || rgb.r.cols() != rgb.b.cols())
    throw ShapeMismatch("grayscale: channel shapes differ");
  Image y = 0.2989 * rgb.r + 0.5870 * rgb.g + 0.1140 * rgb.b;
  return y.max(Scalar(0)).min(Scalar(1));
}

Scalar tv(const Image& u) {
  requireFinite(u, "tv");
  const GradientField g = gradient(u);
  return (g.d1 * g.d1 + g.d2 * g.d2).sqrt().sum();
}

Scalar dtv(const Image& u, const VectorField& xi) {
  requireFinite(u, "dtv");
  if (xi.x1.rows() != u.rows() || xi.x1.cols() != u.cols())
    throw ShapeMismatch("dtv: vector field shape mismatch");
  const GradientField g = gradient(u);
  const Image d = xi.x1 * g.d1 + xi.x2 * g.d2;
  const Image p1 = g.d1 - d * xi.x1;
  const Image p2 = g.d2 - d * xi.x2;
  return (p1 * p1 + p2 * p2).sqrt().sum();
}

Image projectNonnegative(const Image& u) {
  requireFinite(u, "projectNonnegative");
  return u.max(Scalar(0));
}

Kernel projectSimplex(const Kernel& k) {
  requireFinite(k, "projectSimplex");
  const Index q = k.size();
  std::vector<Scalar> v(k.data(), k.data() + q);
  std::sort(v.begin(), v.end(), std::greater<Scalar>());
  Scalar cumsum = 0, theta = 0;
  for (Index j = 0; j < q; ++j) {
    cumsum += v[j];
    const Scalar t = (cumsum - 1) / Scalar(j + 1);
    if (v[j] - t > 0) theta = t;
  }
  return (k - theta).max(Scalar(0));
}

namespace {

// Apply the per-pixel matrix P_i = I - xi_i xi_i^T to a two-component field.
void applyDirectionalMatrix(const VectorField* xi, const Image& g1, const Image& g2, Image& p1,
                            Image& p2) {
  if (!xi) {
    p1 = g1;
    p2 = g2;
    return;
  }
  const Image d = xi->x1 * g1 + xi->x2 * g2;
  p1 = g1 - d * xi->x1;
  p2 = g2 - d * xi->x2;
}

Scalar denoiseObjective(const Image& x, const Image& y, Scalar w, const VectorField* xi) {
  const GradientField g = gradient(x);
  Image p1, p2;
  applyDirectionalMatrix(xi, g.d1, g.d2, p1, p2);
  return Scalar(0.5) * squaredNorm(x - y) + w * (p1 * p1 + p2 * p2).sqrt().sum();
}

// Dual fast gradient projection for
//   argmin_x 1/2 |x - y|^2 + w * sum_i |P_i grad(x)_i| + indicator_C(x)
// with primal recovery x(q) = proj_C(y - w * K^T q), K = P o grad. The dual
// ball step uses the gradient operator norm bound |grad|^2 <= 8.
Image proxDualFgp(const Image& y, Scalar w, const VectorField* xi,
                  const std::function<Image(const Image&)>& projectC, ProxConfig& cfg) {
  const Index m1 = y.rows(), m2 = y.cols();
  if (cfg.dual1.rows() != m1 || cfg.dual1.cols() != m2) {
    cfg.dual1 = Image::Zero(m1, m2);
    cfg.dual2 = Image::Zero(m1, m2);
  }

  const Image x0 = projectC(y);
  if (w <= 0) return x0;

  Image p1 = cfg.dual1, p2 = cfg.dual2;   // current dual iterate
  Image q1 = p1, q2 = p2;                 // extrapolated point
  Scalar t = 1;
  const Scalar step = Scalar(1) / (8 * w);

  Image x, g1, g2, tmp1, tmp2;
  for (int it = 0; it < cfg.maxInnerIterations; ++it) {
    // primal point at the extrapolated dual
    applyDirectionalMatrix(xi, q1, q2, tmp1, tmp2);
    x = projectC(y + w * divergence({tmp1, tmp2}));

    // ascent step and projection onto the unit balls
    const GradientField gx = gradient(x);
    applyDirectionalMatrix(xi, gx.d1, gx.d2, g1, g2);
    Image n1 = q1 + step * g1;
    Image n2 = q2 + step * g2;
    const Image norm = (n1 * n1 + n2 * n2).sqrt().max(Scalar(1));
    n1 /= norm;
    n2 /= norm;

    const Scalar tNext = (1 + std::sqrt(1 + 4 * t * t)) / 2;
    const Scalar beta = (t - 1) / tNext;
    q1 = n1 + beta * (n1 - p1);
    q2 = n2 + beta * (n2 - p2);

    if (cfg.dualityTolerance > 0 && it > 0) {
      const Scalar moved = std::sqrt(squaredNorm(n1 - p1) + squaredNorm(n2 - p2));
      p1.swap(n1);
      p2.swap(n2);
      t = tNext;
      if (moved <= cfg.dualityTolerance) break;
    } else {
      p1.swap(n1);
      p2.swap(n2);
      t = tNext;
    }
  }

  cfg.dual1 = p1;
  cfg.dual2 = p2;

  applyDirectionalMatrix(xi, p1, p2, tmp1, tmp2);
  Image xOut = projectC(y + w * divergence({tmp1, tmp2}));

  // Never return a point worse than the plain projection of the input.
  if (denoiseObjective(xOut, y, w, xi) <= denoiseObjective(x0, y, w, xi)) return xOut;
  return x0;
}

}  // namespace

Image proxDtvNonneg(const Image& y, Scalar tau, Scalar lambdaU, const VectorField& xi,
                    ProxConfig& cfg) {
  if (!(tau > 0)) throw BadStep("proxDtvNonneg: tau must be > 0");
  if (lambdaU < 0) throw BadParams("proxDtvNonneg: lambdaU must be >= 0");
  requireFinite(y, "proxDtvNonneg");
  if (xi.x1.rows() != y.rows() || xi.x1.cols() != y.cols())
    throw ShapeMismatch("proxDtvNonneg: vector field shape mismatch");
  return proxDualFgp(y, tau * lambdaU, &xi,
                     [](const Image& z) -> Image { return z.max(Scalar(0)); }, cfg);
}

Kernel proxTvSimplex(const Kernel& y, Scalar tau, Scalar lambdaK, ProxConfig& cfg) {
  if (!(tau > 0)) throw BadStep("proxTvSimplex: tau must be > 0");
  if (lambdaK < 0) throw BadParams("proxTvSimplex: lambdaK must be >= 0");
  requireFinite(y, "proxTvSimplex");
  return proxDualFgp(y, tau * lambdaK, nullptr,
                     [](const Image& z) -> Image { return projectSimplex(z); }, cfg);
}

}  // namespace specfuse
