#include "tpgen/evaluation.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tpgen {

using Eigen::MatrixXd;
using nlohmann::json;

namespace {

double local_cost(const Vec2& a, const Vec2& b, DtwMetric metric) {
    if (metric == DtwMetric::euclidean) return distance(a, b);
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

double local_cost(double a, double b, DtwMetric metric) {
    (void)metric;  // both metrics coincide on scalars
    return std::abs(a - b);
}

template <typename T>
DtwFeature dtw_impl(const std::vector<T>& a, const std::vector<T>& b, DtwMetric metric) {
    if (a.empty() || b.empty()) throw std::invalid_argument("dtw: empty input sequence");
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    MatrixXd acc(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            const double d = local_cost(a[i], b[j], metric);
            if (i == 0 && j == 0) acc(i, j) = d;
            else if (i == 0) acc(i, j) = d + acc(i, j - 1);
            else if (j == 0) acc(i, j) = d + acc(i - 1, j);
            else acc(i, j) = d + std::min({acc(i - 1, j), acc(i, j - 1), acc(i - 1, j - 1)});
        }
    DtwFeature f;
    f.metric = metric;
    f.dtw_distance = acc(n - 1, m - 1);
    const double peak = acc.maxCoeff();
    f.matrix = peak > 0.0 ? MatrixXd(acc / peak) : acc;
    return f;
}

}  // namespace

DtwFeature dtw(const std::vector<Vec2>& seq_a, const std::vector<Vec2>& seq_b,
               DtwMetric metric) {
    return dtw_impl(seq_a, seq_b, metric);
}

DtwFeature dtw(const std::vector<double>& seq_a, const std::vector<double>& seq_b,
               DtwMetric metric) {
    return dtw_impl(seq_a, seq_b, metric);
}

InteractionFeature scenario_interaction_feature(const Scenario& scenario,
                                                const std::string& vehicle_a,
                                                const std::string& vehicle_b) {
    const VehicleTrack& a = scenario.track(vehicle_a);
    const VehicleTrack& b = scenario.track(vehicle_b);
    InteractionFeature f;
    f.trajectory = dtw(a.positions, b.positions, DtwMetric::euclidean);
    f.speed = dtw(a.speeds, b.speeds, DtwMetric::manhattan);
    return f;
}

MatrixXd resample_bilinear(const MatrixXd& m, int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("resample: bad target shape");
    const int r = static_cast<int>(m.rows());
    const int c = static_cast<int>(m.cols());
    MatrixXd out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const double u = rows > 1 ? static_cast<double>(i) * (r - 1) / (rows - 1) : 0.0;
        const int i0 = std::min(static_cast<int>(u), r - 1);
        const int i1 = std::min(i0 + 1, r - 1);
        const double fu = u - i0;
        for (int j = 0; j < cols; ++j) {
            const double v = cols > 1 ? static_cast<double>(j) * (c - 1) / (cols - 1) : 0.0;
            const int j0 = std::min(static_cast<int>(v), c - 1);
            const int j1 = std::min(j0 + 1, c - 1);
            const double fv = v - j0;
            out(i, j) = (1 - fu) * (1 - fv) * m(i0, j0) + (1 - fu) * fv * m(i0, j1) +
                        fu * (1 - fv) * m(i1, j0) + fu * fv * m(i1, j1);
        }
    }
    return out;
}

DtwFeature aggregate_features(const std::vector<DtwFeature>& features, int rows, int cols) {
    if (features.empty()) throw std::invalid_argument("aggregate_features: no features");
    DtwFeature out;
    out.metric = features.front().metric;
    out.matrix = MatrixXd::Zero(rows, cols);
    double dist = 0.0;
    for (const auto& f : features) {
        out.matrix += resample_bilinear(f.matrix, rows, cols);
        dist += f.dtw_distance;
    }
    out.matrix /= static_cast<double>(features.size());
    out.dtw_distance = dist / static_cast<double>(features.size());
    return out;
}

double feature_discrepancy(const DtwFeature& generated, const DtwFeature& templ) {
    const MatrixXd resampled = resample_bilinear(
        generated.matrix, static_cast<int>(templ.matrix.rows()),
        static_cast<int>(templ.matrix.cols()));
    return (resampled - templ.matrix).cwiseAbs().mean();
}

double min_separation(const Scenario& scenario) {
    scenario.validate();
    const int N = scenario.num_vehicles();
    if (N < 2) return std::numeric_limits<double>::infinity();
    const int T = scenario.length();
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b)
            for (int t = 0; t < T; ++t)
                best = std::min(best, distance(scenario.vehicles[a].positions[t],
                                               scenario.vehicles[b].positions[t]));
    return best;
}

std::string DtwFeature::to_json() const {
    json rows = json::array();
    for (int i = 0; i < matrix.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < matrix.cols(); ++j) row.push_back(matrix(i, j));
        rows.push_back(row);
    }
    return json{{"metric", metric == DtwMetric::euclidean ? "euclidean" : "manhattan"},
                {"dtw_distance", dtw_distance},
                {"matrix", rows}}
        .dump();
}

std::string DtwFeature::to_pgm() const {
    std::ostringstream out;
    out << "P2\n" << matrix.cols() << " " << matrix.rows() << "\n255\n";
    for (int i = 0; i < matrix.rows(); ++i) {
        for (int j = 0; j < matrix.cols(); ++j) {
            const int v = static_cast<int>(std::lround(
                std::min(1.0, std::max(0.0, matrix(i, j))) * 255.0));
            out << v << (j + 1 < matrix.cols() ? " " : "");
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace tpgen
