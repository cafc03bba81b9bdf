#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tpgen/scenario.hpp"

namespace tpgen {

enum class DtwMetric { euclidean, manhattan };

// Accumulated dynamic-time-warping cost matrix, normalized to [0,1] by its
// max entry (an all-zero matrix stays zero). dtw_distance keeps the raw
// bottom-right accumulated cost.
struct DtwFeature {
    Eigen::MatrixXd matrix;
    DtwMetric metric = DtwMetric::euclidean;
    double dtw_distance = 0.0;

    std::string to_json() const;
    // Portable graymap (P2) rendering of the normalized matrix.
    std::string to_pgm() const;
};

DtwFeature dtw(const std::vector<Vec2>& seq_a, const std::vector<Vec2>& seq_b,
               DtwMetric metric);
DtwFeature dtw(const std::vector<double>& seq_a, const std::vector<double>& seq_b,
               DtwMetric metric);

struct InteractionFeature {
    DtwFeature trajectory;  // Euclidean over positions
    DtwFeature speed;       // Manhattan over speeds
};

InteractionFeature scenario_interaction_feature(const Scenario& scenario,
                                                const std::string& vehicle_a,
                                                const std::string& vehicle_b);

// Bilinear resampling of the normalized matrix to a common shape.
Eigen::MatrixXd resample_bilinear(const Eigen::MatrixXd& m, int rows, int cols);

DtwFeature aggregate_features(const std::vector<DtwFeature>& features, int rows, int cols);

// Mean absolute element-wise difference after resampling `generated` to the
// template's shape; lies in [0,1] for normalized features.
double feature_discrepancy(const DtwFeature& generated, const DtwFeature& templ);

// Minimum inter-vehicle distance over all times and vehicle pairs; +infinity
// for single-vehicle scenarios.
double min_separation(const Scenario& scenario);

}  // namespace tpgen
