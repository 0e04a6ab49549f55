// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace kjepa::analysis::thresholds {

// Desk-scale acceptance limits (500 sequences per regime, k = 32, 30 epochs).
inline constexpr double kPurityJepaMin = 0.55;
inline constexpr double kPurityGapMin = 0.10;
inline constexpr double kFrobRelMax = 0.10;
inline constexpr double kSkewRelMax = 0.10;
inline constexpr double kCentroidMeanMax = 0.05;
inline constexpr int kEigenNearOneMin = 18;
inline constexpr double kEigenBandLo = 0.85;
inline constexpr double kEigenBandHi = 1.10;
inline constexpr double kInvarianceMax = 0.20;
inline constexpr double kInvarianceUntrainedRatio = 2.0;
inline constexpr double kDecompositionGapMax = 1e-6;
inline constexpr double kGradCheckCompositeMax = 1e-4;
inline constexpr double kGradCheckLayerMax = 1e-6;
// The reconstruction loss is O(1) while its deep conv gradients are O(1e-9),
// so its difference quotients are roundoff-limited at small steps.
inline constexpr double kAeGradCheckStep = 1e-3;
inline constexpr double kAeGradCheckMax = 1e-3;
inline constexpr double kControlValLossRatio = 0.20;
inline constexpr double kControlFrobRelMin = 0.5;

// Full-scale figures quoted for comparison only.
inline constexpr double kPaperPurityJepa = 0.6548;
inline constexpr double kPaperPurityAe = 0.3881;
inline constexpr double kPaperFrobRel = 0.0234;
inline constexpr double kPaperSkewRel = 0.0206;
inline constexpr double kPaperCentroidMean = 0.0080;

}  // namespace kjepa::analysis::thresholds
