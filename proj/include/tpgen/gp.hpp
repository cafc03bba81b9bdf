#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tpgen/geometry.hpp"

namespace tpgen {

struct GpHyperparams {
    double sigma_omega = 10.0;  // weight-prior scale; kept for configuration
                                // compatibility, not folded into the solve
    double sigma_f = 10.0;      // kernel amplitude
    double length_scale = 100.0;
    double sigma_n = 1.0;       // observation noise std

    void validate() const;
};

enum class PriorMode { fitted_poly, data_mean, zero };

// Least-squares polynomial fit; coefficients lowest order first.
Eigen::VectorXd fit_poly_prior(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree);

double eval_poly(const Eigen::VectorXd& coeffs, double x);
Eigen::VectorXd eval_poly(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& x);

// K[i,j] = sigma_f^2 * exp(-(x_i - x'_j)^2 / (2 l^2))
Eigen::MatrixXd sq_exp_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
                              const GpHyperparams& hp);

// Scalar-input GP with a deterministic mean prior (default: cubic polynomial
// fitted to the training data) and squared-exponential kernel. Supports
// per-point noise variances so individual observations can be pinned tightly.
class GpModel {
  public:
    GpModel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const GpHyperparams& hp,
            PriorMode prior = PriorMode::fitted_poly, int poly_degree = 3);
    GpModel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const GpHyperparams& hp,
            const Eigen::VectorXd& noise_variances, PriorMode prior = PriorMode::fitted_poly,
            int poly_degree = 3);

    // Empty-training model with an explicit prior polynomial.
    GpModel(const Eigen::VectorXd& prior_coeffs, const GpHyperparams& hp);

    const Eigen::VectorXd& training_inputs() const { return x_; }
    const Eigen::VectorXd& training_outputs() const { return y_; }
    const Eigen::VectorXd& prior_coeffs() const { return coeffs_; }
    const GpHyperparams& hyperparams() const { return hp_; }

    Eigen::VectorXd prior_mean(const Eigen::VectorXd& x) const;

    // Posterior over test inputs; covariance is symmetrized and, when needed,
    // given escalating diagonal jitter (1e-10 .. 1e-6) until it factorizes.
    void posterior(const Eigen::VectorXd& x_star, Eigen::VectorXd& mean,
                   Eigen::MatrixXd& cov) const;

    std::vector<Eigen::VectorXd> sample_posterior(const Eigen::VectorXd& x_star, int n_samples,
                                                  std::uint64_t seed) const;

  private:
    void factorize();

    Eigen::VectorXd x_;
    Eigen::VectorXd y_;
    Eigen::VectorXd noise_var_;
    GpHyperparams hp_;
    Eigen::VectorXd coeffs_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;       // (K + diag(noise))^-1 (y - prior(x))
};

// Draw factor for a PSD matrix: clamped LDLT so exactly-singular covariances
// (e.g. the zero matrix) sample without artificial noise.
Eigen::MatrixXd psd_sampling_factor(const Eigen::MatrixXd& cov);

// Constant-acceleration training points along a planned path: the time-t
// point sits at arc position s(t) = v_in t + a t^2 / 2 with a chosen so
// s(duration) equals the path length. A non-monotone profile (implied
// reversal) falls back to uniform spacing and sets `uniform_fallback`.
struct TrainingPoints {
    std::vector<double> times;    // 0..duration inclusive
    std::vector<double> xs;
    std::vector<double> ys;
    bool uniform_fallback = false;
};

TrainingPoints synthesize_training_points(const std::vector<Vec2>& path_waypoints,
                                          double v_in, double v_out, int duration);

}  // namespace tpgen
