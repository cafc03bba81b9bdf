#include "tpgen/segmentation.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "tpgen/rng.hpp"

namespace tpgen {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

void StickyHdpHmmConfig::validate(int dim) const {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (truncation_L < 2) throw std::invalid_argument("truncation_L must be >= 2");
    if (!(gamma > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("gamma, alpha must be > 0");
    if (kappa < 0.0) throw std::invalid_argument("kappa must be >= 0");
    if (min_primitive_len < 1) throw std::invalid_argument("min_primitive_len must be >= 1");
    const double nu = emission_prior.nu0 > 0.0 ? emission_prior.nu0 : dim + 2;
    if (!(nu > dim - 1)) throw std::invalid_argument("nu0 must exceed dim - 1");
    if (!(emission_prior.kappa0 > 0.0)) throw std::invalid_argument("kappa0 must be > 0");
}

std::vector<int> merge_short_runs(const std::vector<int>& labels, int min_primitive_len) {
    if (labels.empty()) throw std::invalid_argument("empty label sequence");
    std::vector<int> merged = labels;
    for (;;) {
        // Run-length encode.
        struct Run { int label; int start; int len; };
        std::vector<Run> runs;
        for (int t = 0; t < static_cast<int>(merged.size()); ++t) {
            if (runs.empty() || runs.back().label != merged[t])
                runs.push_back({merged[t], t, 1});
            else
                ++runs.back().len;
        }
        if (runs.size() == 1) break;

        // Shortest run first, earliest on ties.
        int victim = -1;
        for (int i = 0; i < static_cast<int>(runs.size()); ++i)
            if (victim < 0 || runs[i].len < runs[victim].len) victim = i;
        if (runs[victim].len >= min_primitive_len) break;

        int target;
        if (victim == 0) target = 1;
        else if (victim + 1 == static_cast<int>(runs.size())) target = victim - 1;
        else target = runs[victim + 1].len > runs[victim - 1].len ? victim + 1 : victim - 1;
        for (int t = runs[victim].start; t < runs[victim].start + runs[victim].len; ++t)
            merged[t] = runs[target].label;
    }
    return merged;
}

std::vector<int> extract_changepoints(const std::vector<int>& labels, int min_primitive_len) {
    const std::vector<int> merged = merge_short_runs(labels, min_primitive_len);
    std::vector<int> cps;
    for (int t = 1; t < static_cast<int>(merged.size()); ++t)
        if (merged[t] != merged[t - 1]) cps.push_back(t);
    return cps;
}

PriorTransitionStats prior_self_transition_check(double alpha, double kappa, int L,
                                                 int n_draws, std::uint64_t seed) {
    if (n_draws < 1000) throw std::invalid_argument("need at least 1000 draws");
    if (L < 2) throw std::invalid_argument("L must be >= 2");
    Rng rng(seed);
    std::vector<double> conc(L, alpha / L);
    conc[0] += kappa;  // row 0 is representative by symmetry
    double sum_self = 0.0, sumsq_self = 0.0, sum_cross = 0.0, sumsq_cross = 0.0;
    for (int i = 0; i < n_draws; ++i) {
        const auto row = rng.dirichlet(conc);
        sum_self += row[0];
        sumsq_self += row[0] * row[0];
        const double cross = (1.0 - row[0]) / (L - 1);  // mean off-diagonal mass
        sum_cross += cross;
        sumsq_cross += cross * cross;
    }
    PriorTransitionStats stats;
    stats.mean_self = sum_self / n_draws;
    stats.mean_cross = sum_cross / n_draws;
    const double var_self = sumsq_self / n_draws - stats.mean_self * stats.mean_self;
    const double var_cross = sumsq_cross / n_draws - stats.mean_cross * stats.mean_cross;
    stats.se_self = std::sqrt(std::max(0.0, var_self) / n_draws);
    stats.se_cross = std::sqrt(std::max(0.0, var_cross) / n_draws);
    return stats;
}

namespace {

struct NiwParams {
    double kappa;
    double nu;
    VectorXd mu;
    MatrixXd psi;
};

// Draw (mean, covariance) from a Normal-Inverse-Wishart. The covariance draw
// uses the Bartlett decomposition: W ~ Wishart(nu, I), Sigma = Lp W^{-1} Lp^T
// where psi = Lp Lp^T, so that Sigma^{-1} ~ Wishart(nu, psi^{-1}).
GaussianParams sample_niw(const NiwParams& p, Rng& rng) {
    const int d = static_cast<int>(p.mu.size());
    MatrixXd bartlett = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        bartlett(i, i) = std::sqrt(rng.chi_squared(p.nu - i));
        for (int j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
    }
    Eigen::LLT<MatrixXd> llt(p.psi);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("NIW scale matrix is not positive definite");
    const MatrixXd lp = llt.matrixL();
    // B = Lp * A^{-T}  via  A^T B^T... solve A X = Lp^T for X, then B = X^T.
    const MatrixXd x = bartlett.triangularView<Eigen::Lower>().solve(lp.transpose());
    GaussianParams g;
    g.covariance = x.transpose() * x;
    g.covariance = 0.5 * (g.covariance + g.covariance.transpose());

    Eigen::LLT<MatrixXd> cov_llt(g.covariance);
    if (cov_llt.info() != Eigen::Success)
        throw std::runtime_error("sampled covariance is not positive definite");
    VectorXd z(d);
    for (int i = 0; i < d; ++i) z(i) = rng.normal();
    g.mean = p.mu + MatrixXd(cov_llt.matrixL()) * z / std::sqrt(p.kappa);
    return g;
}

NiwParams posterior_niw(const NiwParams& prior, int n, const VectorXd& data_mean,
                        const MatrixXd& scatter) {
    NiwParams post;
    post.kappa = prior.kappa + n;
    post.nu = prior.nu + n;
    if (n == 0) {
        post.mu = prior.mu;
        post.psi = prior.psi;
        return post;
    }
    post.mu = (prior.kappa * prior.mu + n * data_mean) / post.kappa;
    const VectorXd diff = data_mean - prior.mu;
    post.psi = prior.psi + scatter +
               (prior.kappa * n / post.kappa) * (diff * diff.transpose());
    post.psi = 0.5 * (post.psi + post.psi.transpose());
    return post;
}

// Per-state Gaussian log densities for every observation row.
MatrixXd log_likelihoods(const MatrixXd& obs, const std::vector<GaussianParams>& states) {
    const int T = static_cast<int>(obs.rows());
    const int d = static_cast<int>(obs.cols());
    const int L = static_cast<int>(states.size());
    const double log2pi = std::log(2.0 * M_PI);
    MatrixXd ll(T, L);
    for (int k = 0; k < L; ++k) {
        Eigen::LLT<MatrixXd> llt(states[k].covariance);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("state covariance lost positive definiteness");
        const MatrixXd lmat = llt.matrixL();
        double logdet = 0.0;
        for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(lmat(i, i));
        const double base = -0.5 * (d * log2pi + logdet);
        for (int t = 0; t < T; ++t) {
            const VectorXd diff = obs.row(t).transpose() - states[k].mean;
            const VectorXd sol = llt.matrixL().solve(diff);
            ll(t, k) = base - 0.5 * sol.squaredNorm();
        }
    }
    return ll;
}

// Table counts for the Chinese-restaurant-franchise representation: the number
// of "tables" behind n customers at weight w.
int sample_table_count(int n, double w, Rng& rng) {
    int m = 0;
    for (int c = 1; c <= n; ++c)
        if (rng.uniform() < w / (w + c - 1)) ++m;
    return m;
}

}  // namespace

SegmentationResult fit_sticky_hdphmm(const ObservationMatrix& obs,
                                     const StickyHdpHmmConfig& cfg) {
    const MatrixXd& y = obs.values;
    const int T = static_cast<int>(y.rows());
    const int d = static_cast<int>(y.cols());
    if (T < 4) throw std::invalid_argument("need at least 4 observations");
    if (!y.allFinite()) throw std::invalid_argument("observations must be finite");
    cfg.validate(d);

    const int L = cfg.truncation_L;
    const double alpha = cfg.alpha;
    const double kappa = cfg.kappa;
    const double gamma = cfg.gamma;
    Rng rng(cfg.seed);

    // Resolve the emission prior against the data.
    NiwParams prior;
    prior.kappa = cfg.emission_prior.kappa0;
    prior.nu = cfg.emission_prior.nu0 > 0.0 ? cfg.emission_prior.nu0 : d + 2;
    if (cfg.emission_prior.data_driven) {
        const VectorXd mean = y.colwise().mean();
        const MatrixXd centered = y.rowwise() - mean.transpose();
        MatrixXd cov = centered.transpose() * centered / T;
        prior.mu = mean;
        prior.psi = cfg.emission_prior.psi_scale * cov +
                    1e-6 * MatrixXd::Identity(d, d);  // ridge for degenerate columns
    } else {
        prior.mu = cfg.emission_prior.mu0;
        prior.psi = cfg.emission_prior.psi0;
        if (prior.mu.size() != d || prior.psi.rows() != d || prior.psi.cols() != d)
            throw std::invalid_argument("emission prior dimension mismatch");
    }

    // Initial state: uniform beta, prior-mean transition rows. State 0 starts
    // from the all-data posterior so the chain refines by splitting; starting
    // every state from the prior tends to shatter regimes across duplicate
    // states that 200 sweeps cannot merge.
    VectorXd beta = VectorXd::Constant(L, 1.0 / L);
    MatrixXd pi(L, L);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
            pi(i, j) = (alpha * beta(j) + (i == j ? kappa : 0.0)) / (alpha + kappa);
    VectorXd pi0 = beta;
    std::vector<GaussianParams> states(L);
    {
        const VectorXd all_mean = y.colwise().mean();
        const MatrixXd all_centered = y.rowwise() - all_mean.transpose();
        const MatrixXd all_scatter = all_centered.transpose() * all_centered;
        states[0] = sample_niw(posterior_niw(prior, T, all_mean, all_scatter), rng);
    }
    for (int k = 1; k < L; ++k) states[k] = sample_niw(prior, rng);

    std::vector<int> z(T, 0);
    std::vector<double> trace;
    trace.reserve(cfg.iterations);

    std::vector<double> weights(L);
    for (int sweep = 0; sweep < cfg.iterations; ++sweep) {
        const MatrixXd ll = log_likelihoods(y, states);

        // (a) Block-sample z via backward messages + forward draws. Messages
        // are normalized each step; likelihoods are max-shifted per row.
        MatrixXd lik(T, L);
        for (int t = 0; t < T; ++t) {
            const double shift = ll.row(t).maxCoeff();
            lik.row(t) = (ll.row(t).array() - shift).exp();
        }
        // msg.row(t) is proportional to p(y_{t+1:T} | z_t).
        MatrixXd msg(T, L);
        msg.row(T - 1).setOnes();
        for (int t = T - 1; t >= 1; --t) {
            const VectorXd w = lik.row(t).transpose().cwiseProduct(msg.row(t).transpose());
            VectorXd m = pi * w;
            const double total = m.sum();
            if (!(total > 0.0)) m.setConstant(1.0);
            else m /= total;
            msg.row(t - 1) = m.transpose();
        }
        for (int k = 0; k < L; ++k) weights[k] = pi0(k) * lik(0, k) * msg(0, k);
        z[0] = rng.categorical(weights);
        for (int t = 1; t < T; ++t) {
            for (int k = 0; k < L; ++k) weights[k] = pi(z[t - 1], k) * lik(t, k) * msg(t, k);
            z[t] = rng.categorical(weights);
        }

        // Transition and initial-state counts.
        MatrixXd counts = MatrixXd::Zero(L, L);
        for (int t = 1; t < T; ++t) counts(z[t - 1], z[t]) += 1.0;
        VectorXd init_counts = VectorXd::Zero(L);
        init_counts(z[0]) = 1.0;

        // (c) Auxiliary table counts, sticky override, then beta.
        MatrixXd tables = MatrixXd::Zero(L, L);
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) {
                const int n = static_cast<int>(counts(i, j));
                if (n > 0)
                    tables(i, j) = sample_table_count(
                        n, alpha * beta(j) + (i == j ? kappa : 0.0), rng);
            }
        const double rho = kappa / (alpha + kappa);
        if (rho > 0.0)
            for (int i = 0; i < L; ++i) {
                const int mii = static_cast<int>(tables(i, i));
                if (mii > 0) {
                    const double p = rho / (rho + beta(i) * (1.0 - rho));
                    tables(i, i) -= rng.binomial(mii, p);
                }
            }
        VectorXd init_tables = VectorXd::Zero(L);
        init_tables(z[0]) = sample_table_count(1, alpha * beta(z[0]), rng);
        std::vector<double> beta_conc(L);
        for (int k = 0; k < L; ++k)
            beta_conc[k] = gamma / L + tables.col(k).sum() + init_tables(k);
        const auto beta_draw = rng.dirichlet(beta_conc);
        double beta_total = 0.0;
        for (int k = 0; k < L; ++k) {
            beta(k) = std::max(beta_draw[k], cfg.beta_floor);
            beta_total += beta(k);
        }
        beta /= beta_total;

        // (b) Transition rows from their Dirichlet posteriors with the sticky
        // bias adding kappa to the self pseudo-count.
        std::vector<double> row_conc(L);
        for (int i = 0; i < L; ++i) {
            for (int j = 0; j < L; ++j)
                row_conc[j] = alpha * beta(j) + counts(i, j) + (i == j ? kappa : 0.0);
            auto row = rng.dirichlet(row_conc);
            double total = 0.0;
            for (double& v : row) total += (v = std::max(v, cfg.pi_floor));
            for (int j = 0; j < L; ++j) pi(i, j) = row[j] / total;
        }
        for (int k = 0; k < L; ++k) row_conc[k] = alpha * beta(k) + init_counts(k);
        auto pi0_draw = rng.dirichlet(row_conc);
        double pi0_total = 0.0;
        for (double& v : pi0_draw) pi0_total += (v = std::max(v, cfg.pi_floor));
        for (int k = 0; k < L; ++k) pi0(k) = pi0_draw[k] / pi0_total;

        // (d) Emission parameters from their NIW posteriors.
        for (int k = 0; k < L; ++k) {
            int n = 0;
            VectorXd sum = VectorXd::Zero(d);
            for (int t = 0; t < T; ++t)
                if (z[t] == k) {
                    ++n;
                    sum += y.row(t).transpose();
                }
            if (n == 0 && cfg.data_seeded_births) {
                // Birth proposal: NIW posterior of a short window of
                // consecutive observations, so the proposal inherits the
                // local mean and the local covariance orientation.
                const int w = std::min(std::max(cfg.birth_window, 2), T);
                const int t0 = static_cast<int>(rng.uniform() * (T - w + 1)) % (T - w + 1);
                const VectorXd wmean = y.middleRows(t0, w).colwise().mean();
                const MatrixXd wc = y.middleRows(t0, w).rowwise() - wmean.transpose();
                states[k] = sample_niw(
                    posterior_niw(prior, w, wmean, wc.transpose() * wc), rng);
                continue;
            }
            VectorXd mean = n > 0 ? VectorXd(sum / n) : VectorXd::Zero(d);
            MatrixXd scatter = MatrixXd::Zero(d, d);
            if (n > 0)
                for (int t = 0; t < T; ++t)
                    if (z[t] == k) {
                        const VectorXd diff = y.row(t).transpose() - mean;
                        scatter += diff * diff.transpose();
                    }
            states[k] = sample_niw(posterior_niw(prior, n, mean, scatter), rng);
        }

        // Joint log density of (y, z) under the freshly sampled parameters.
        const MatrixXd ll_new = log_likelihoods(y, states);
        double joint = std::log(std::max(pi0(z[0]), 1e-300)) + ll_new(0, z[0]);
        for (int t = 1; t < T; ++t)
            joint += std::log(std::max(pi(z[t - 1], z[t]), 1e-300)) + ll_new(t, z[t]);
        trace.push_back(joint);
    }

    SegmentationResult result;
    result.labels = merge_short_runs(z, cfg.min_primitive_len);
    result.changepoints = extract_changepoints(z, cfg.min_primitive_len);
    result.transition_matrix = pi;
    result.emission_params = states;
    result.beta = beta;
    result.log_likelihood_trace = std::move(trace);
    return result;
}

std::string SegmentationResult::to_json() const {
    json states = json::array();
    for (const auto& g : emission_params) {
        json mean = json::array();
        for (int i = 0; i < g.mean.size(); ++i) mean.push_back(g.mean(i));
        json cov = json::array();
        for (int i = 0; i < g.covariance.rows(); ++i) {
            json row = json::array();
            for (int j = 0; j < g.covariance.cols(); ++j) row.push_back(g.covariance(i, j));
            cov.push_back(row);
        }
        states.push_back({{"mean", mean}, {"covariance", cov}});
    }
    json pi_rows = json::array();
    for (int i = 0; i < transition_matrix.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < transition_matrix.cols(); ++j)
            row.push_back(transition_matrix(i, j));
        pi_rows.push_back(row);
    }
    json beta_arr = json::array();
    for (int i = 0; i < beta.size(); ++i) beta_arr.push_back(beta(i));
    json j{{"labels", labels},
           {"changepoints", changepoints},
           {"transition_matrix", pi_rows},
           {"emission_params", states},
           {"beta", beta_arr},
           {"log_likelihood_trace", log_likelihood_trace}};
    return j.dump(2);
}

}  // namespace tpgen
