// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace evac {

/// Linear-interpolation quantile of an ascending-sorted sample, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

/// Ranks starting at 1; ties share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation with tie-averaged ranks; 0 when either side is
/// constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace evac
