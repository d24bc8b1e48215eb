#ifndef SPECFUSE_METRICS_HPP
#define SPECFUSE_METRICS_HPP

#include "specfuse/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace specfuse {

struct SimilarityReport {
  Scalar ssim = 0;
  Scalar meanSquaredError = 0;
  Scalar psnr = 0;
};

// Mean structural similarity with the usual 11x11 Gaussian window (sigma 1.5)
// over the valid filtering region; C1 = (0.01*range)^2, C2 = (0.03*range)^2.
Scalar ssim(const Image& x, const Image& y, Scalar dynamicRange);

Scalar meanSquaredError(const Image& x, const Image& y);
Scalar psnr(const Image& x, const Image& y, Scalar dynamicRange);

SimilarityReport similarity(const Image& x, const Image& y, Scalar dynamicRange);

// Mass center sum_i i*k_i in 1-based tap coordinates (row, col).
std::pair<Scalar, Scalar> kernelCentroid(const Kernel& k);

struct SweepRow {
  Scalar lambdaU = 0;
  Scalar lambdaK = 0;
  Scalar gamma = 0;
  Scalar ssim = 0;
  Scalar mse = 0;
  Scalar psnr = 0;
  Scalar finalObjective = 0;
  bool failed = false;
};

inline constexpr const char* kSweepCsvHeader =
    "lambda_u,lambda_k,gamma,ssim,mse,psnr,final_objective";

void writeSweepCsv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace specfuse

#endif
