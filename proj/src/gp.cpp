#include "tpgen/gp.hpp"

#include <cmath>
#include <stdexcept>

#include "tpgen/rng.hpp"
#include "tpgen/scenario.hpp"

namespace tpgen {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void GpHyperparams::validate() const {
    if (!(sigma_omega > 0.0) || !(sigma_f > 0.0) || !(length_scale > 0.0) || !(sigma_n > 0.0))
        throw std::invalid_argument("GP hyperparameters must be strictly positive");
}

VectorXd fit_poly_prior(const VectorXd& x, const VectorXd& y, int degree) {
    if (degree < 0) throw std::invalid_argument("degree must be >= 0");
    if (x.size() != y.size()) throw std::invalid_argument("x/y length mismatch");
    if (x.size() < degree + 1)
        throw std::invalid_argument("need at least degree+1 points");
    for (int i = 0; i < x.size(); ++i)
        for (int j = i + 1; j < x.size(); ++j)
            if (x(i) == x(j))
                throw std::invalid_argument("duplicate x values make the fit rank-deficient");
    MatrixXd vandermonde(x.size(), degree + 1);
    for (int i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            vandermonde(i, d) = p;
            p *= x(i);
        }
    }
    return vandermonde.colPivHouseholderQr().solve(y);
}

double eval_poly(const VectorXd& coeffs, double x) {
    double acc = 0.0;
    for (int d = static_cast<int>(coeffs.size()) - 1; d >= 0; --d) acc = acc * x + coeffs(d);
    return acc;
}

VectorXd eval_poly(const VectorXd& coeffs, const VectorXd& x) {
    VectorXd out(x.size());
    for (int i = 0; i < x.size(); ++i) out(i) = eval_poly(coeffs, x(i));
    return out;
}

MatrixXd sq_exp_kernel(const VectorXd& x, const VectorXd& x_prime, const GpHyperparams& hp) {
    const double amp = hp.sigma_f * hp.sigma_f;
    const double inv = 1.0 / (2.0 * hp.length_scale * hp.length_scale);
    MatrixXd k(x.size(), x_prime.size());
    for (int i = 0; i < x.size(); ++i)
        for (int j = 0; j < x_prime.size(); ++j) {
            const double d = x(i) - x_prime(j);
            k(i, j) = amp * std::exp(-d * d * inv);
        }
    return k;
}

GpModel::GpModel(const VectorXd& x, const VectorXd& y, const GpHyperparams& hp,
                 PriorMode prior, int poly_degree)
    : GpModel(x, y, hp, VectorXd::Constant(x.size(), hp.sigma_n * hp.sigma_n), prior,
              poly_degree) {}

GpModel::GpModel(const VectorXd& x, const VectorXd& y, const GpHyperparams& hp,
                 const VectorXd& noise_variances, PriorMode prior, int poly_degree)
    : x_(x), y_(y), noise_var_(noise_variances), hp_(hp) {
    hp_.validate();
    if (x_.size() != y_.size() || x_.size() != noise_var_.size())
        throw std::invalid_argument("training input/output/noise length mismatch");
    if (x_.size() == 0) throw std::invalid_argument("no training points; use the prior-only constructor");
    switch (prior) {
        case PriorMode::zero:
            coeffs_ = VectorXd::Zero(1);
            break;
        case PriorMode::data_mean:
            coeffs_ = VectorXd::Constant(1, y_.mean());
            break;
        case PriorMode::fitted_poly: {
            // Degrade gracefully when there are too few points for the degree.
            const int degree = std::min<int>(poly_degree, static_cast<int>(x_.size()) - 1);
            coeffs_ = fit_poly_prior(x_, y_, degree);
            break;
        }
    }
    factorize();
}

GpModel::GpModel(const VectorXd& prior_coeffs, const GpHyperparams& hp)
    : x_(0), y_(0), noise_var_(0), hp_(hp), coeffs_(prior_coeffs) {
    hp_.validate();
    if (coeffs_.size() == 0) coeffs_ = VectorXd::Zero(1);
}

void GpModel::factorize() {
    MatrixXd gram = sq_exp_kernel(x_, x_, hp_);
    gram.diagonal() += noise_var_;
    chol_.compute(gram);
    if (chol_.info() != Eigen::Success)
        throw std::runtime_error("GP Gram matrix failed to factorize");
    alpha_ = chol_.solve(y_ - eval_poly(coeffs_, x_));
}

VectorXd GpModel::prior_mean(const VectorXd& x) const { return eval_poly(coeffs_, x); }

void GpModel::posterior(const VectorXd& x_star, VectorXd& mean, MatrixXd& cov) const {
    if (x_.size() == 0) {
        mean = eval_poly(coeffs_, x_star);
        cov = sq_exp_kernel(x_star, x_star, hp_);
    } else {
        const MatrixXd k_cross = sq_exp_kernel(x_star, x_, hp_);
        mean = eval_poly(coeffs_, x_star) + k_cross * alpha_;
        cov = sq_exp_kernel(x_star, x_star, hp_) - k_cross * chol_.solve(k_cross.transpose());
    }
    cov = 0.5 * (cov + cov.transpose());

    // PSD repair with the smallest jitter that factorizes.
    Eigen::LLT<MatrixXd> probe(cov);
    if (probe.info() == Eigen::Success) return;
    for (double jitter = 1e-10; jitter <= 1.0000001e-6; jitter *= 10.0) {
        MatrixXd repaired = cov;
        repaired.diagonal().array() += jitter;
        probe.compute(repaired);
        if (probe.info() == Eigen::Success) {
            cov = repaired;
            return;
        }
    }
    throw std::runtime_error("posterior covariance not PSD after maximum jitter");
}

MatrixXd psd_sampling_factor(const MatrixXd& cov) {
    Eigen::LDLT<MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("covariance LDLT failed");
    VectorXd d = ldlt.vectorD();
    for (int i = 0; i < d.size(); ++i) d(i) = d(i) > 0.0 ? std::sqrt(d(i)) : 0.0;
    const MatrixXd l = ldlt.matrixL();
    return ldlt.transpositionsP().transpose() * MatrixXd(l * d.asDiagonal());
}

std::vector<VectorXd> GpModel::sample_posterior(const VectorXd& x_star, int n_samples,
                                                std::uint64_t seed) const {
    std::vector<VectorXd> samples;
    if (n_samples <= 0) return samples;
    VectorXd mean;
    MatrixXd cov;
    posterior(x_star, mean, cov);
    const MatrixXd factor = psd_sampling_factor(cov);
    Rng rng(seed);
    VectorXd z(x_star.size());
    for (int s = 0; s < n_samples; ++s) {
        for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
        samples.push_back(mean + factor * z);
    }
    return samples;
}

TrainingPoints synthesize_training_points(const std::vector<Vec2>& path_waypoints,
                                          double v_in, double v_out, int duration) {
    (void)v_out;  // recorded by callers; the profile is pinned by v_in and length
    if (duration < 2) throw std::invalid_argument("duration must be >= 2");
    if (path_waypoints.empty()) throw std::invalid_argument("empty path");

    const std::vector<double> cumulative = cumulative_lengths(path_waypoints);
    const double total = cumulative.back();
    const double t_end = static_cast<double>(duration);

    TrainingPoints out;
    const double accel = 2.0 * (total - v_in * t_end) / (t_end * t_end);
    // Reversal check: velocity v_in + a t must stay non-negative on [0, T].
    out.uniform_fallback = (v_in + accel * t_end < -1e-12) || (v_in < 0.0);

    for (int t = 0; t <= duration; ++t) {
        double s;
        if (out.uniform_fallback)
            s = total * t / t_end;
        else
            s = v_in * t + 0.5 * accel * t * t;
        const Vec2 p = point_at_arc_length(path_waypoints, cumulative, s);
        out.times.push_back(static_cast<double>(t));
        out.xs.push_back(p.x);
        out.ys.push_back(p.y);
    }
    return out;
}

}  // namespace tpgen
