#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tpgen/scenario.hpp"

namespace tpgen {

// Normal-Inverse-Wishart prior over a state's Gaussian emission.
// When data_driven is true, mu0 is set to the observation mean and psi0 to
// psi_scale times the observation covariance (plus a small ridge) at fit time.
struct NiwPrior {
    bool data_driven = true;
    double kappa0 = 0.1;
    double nu0 = 0.0;          // 0 -> dim + 2
    double psi_scale = 0.75;
    Eigen::VectorXd mu0;       // used when data_driven is false
    Eigen::MatrixXd psi0;
};

struct StickyHdpHmmConfig {
    int truncation_L = 20;
    double gamma = 1.0;        // top-level DP concentration
    double alpha = 1.0;        // second-level concentration
    double kappa = 9.0;        // self-transition bias; kappa/(alpha+kappa) = 0.9
    int iterations = 200;
    int min_primitive_len = 2; // runs shorter than this get merged away
    std::uint64_t seed = 0;
    NiwPrior emission_prior;
    // Empty states re-draw their Gaussian from the NIW posterior of a short
    // window of consecutive observations instead of the bare prior. Pure
    // prior draws almost never land near a data mode once the feature
    // dimension grows past two or three, which stalls state births; a window
    // (rather than a single point) aligns the proposal with the local
    // manifold of strongly correlated features.
    bool data_seeded_births = true;
    int birth_window = 10;
    // Numerical guards for the weak-limit hierarchy: Dirichlet draws with
    // concentrations of order gamma/L or alpha*beta_k underflow to exact
    // zero at double precision, permanently closing the doorway into
    // unoccupied states. Floors keep every transition representable.
    double beta_floor = 1e-4;
    double pi_floor = 1e-6;

    void validate(int dim) const;
};

struct GaussianParams {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

struct SegmentationResult {
    std::vector<int> labels;             // length T, post-pruning
    std::vector<int> changepoints;       // strictly increasing, in (0, T)
    Eigen::MatrixXd transition_matrix;   // L x L, row-stochastic
    std::vector<GaussianParams> emission_params;
    Eigen::VectorXd beta;                // global state weights
    std::vector<double> log_likelihood_trace;

    std::string to_json() const;
};

SegmentationResult fit_sticky_hdphmm(const ObservationMatrix& obs,
                                     const StickyHdpHmmConfig& cfg);

// Boundaries where the label changes, after merging every run shorter than
// min_primitive_len into its longer neighbor (ties keep the preceding run).
std::vector<int> extract_changepoints(const std::vector<int>& labels, int min_primitive_len);

// Labels after the short-run merge used by extract_changepoints.
std::vector<int> merge_short_runs(const std::vector<int>& labels, int min_primitive_len);

// Diagnostic: empirical self/cross transition mass under the sticky Dirichlet
// row prior with symmetric beta = 1/L.
struct PriorTransitionStats {
    double mean_self = 0.0;
    double mean_cross = 0.0;
    double se_self = 0.0;
    double se_cross = 0.0;
};

PriorTransitionStats prior_self_transition_check(double alpha, double kappa, int L,
                                                 int n_draws, std::uint64_t seed);

}  // namespace tpgen
