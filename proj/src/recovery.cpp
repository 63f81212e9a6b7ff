#include "loanhazard/recovery.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "loanhazard/csv.hpp"

namespace loanhazard {

std::vector<int> RecoveryPoints::flagged() const {
    std::vector<int> out;
    for (Eigen::Index i = 0; i < size(); ++i) {
        if (values(i) > 1.0) out.push_back(ages(i));
    }
    return out;
}

RecoveryPoints recovery_points(std::span<const std::pair<int, double>> defaulted) {
    if (defaulted.empty()) fail(Errc::InvalidArgument, "no defaulted loans to average");
    std::map<int, std::pair<double, int>> acc;
    for (const auto& [age, pct] : defaulted) {
        require(std::isfinite(pct), "recovery percentage must be finite");
        auto& [sum, count] = acc[age];
        sum += pct;
        ++count;
    }
    RecoveryPoints p;
    const auto n = static_cast<Eigen::Index>(acc.size());
    p.ages.resize(n);
    p.values.resize(n);
    p.counts.resize(n);
    Eigen::Index i = 0;
    for (const auto& [age, sc] : acc) {
        p.ages(i) = age;
        p.values(i) = sc.first / sc.second;
        p.counts(i) = sc.second;
        ++i;
    }
    return p;
}

Eigen::VectorXd smooth(const Eigen::VectorXd& ages, const Eigen::VectorXd& values, double span) {
    const Eigen::Index n = ages.size();
    require(values.size() == n, "ages and values differ in length");
    require(n >= 5, "smoothing needs at least five points");
    require(span > 0.0, "span must be positive");

    const auto q = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(span * static_cast<double>(n))), 2, n);
    Eigen::VectorXd fitted(n);
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
        const double x0 = ages(t);
        const Eigen::ArrayXd d = (ages.array() - x0).abs();
        std::copy(d.begin(), d.end(), dist.begin());
        std::nth_element(dist.begin(), dist.begin() + (q - 1), dist.end());
        // widen slightly so the q-th nearest point keeps a positive weight
        double h = dist[static_cast<std::size_t>(q - 1)] * 1.001 * std::max(1.0, span);
        if (h <= 0.0) h = 1.0;

        const Eigen::ArrayXd u = (d / h).min(1.0);
        const Eigen::ArrayXd w = (1.0 - u.cube()).cube();
        Eigen::MatrixXd design(n, 2);
        design.col(0).setOnes();
        design.col(1) = ages.array() - x0;
        const Eigen::Matrix2d normal = design.transpose() * w.matrix().asDiagonal() * design;
        const Eigen::Vector2d rhs = design.transpose() * (w * values.array()).matrix();
        const Eigen::Vector2d beta = normal.ldlt().solve(rhs);
        fitted(t) = beta(0);
    }
    return fitted;
}

Eigen::VectorXd smooth(const RecoveryPoints& points, double span) {
    return smooth(points.ages.cast<double>(), points.values, span);
}

double GammaKernelFit::operator()(double x) const {
    if (x <= 0.0) return 0.0;
    return scale * std::pow(x, shape - 1.0) * std::exp(-x / theta);
}

double GammaKernelFit::peak_age() const { return shape > 1.0 ? (shape - 1.0) * theta : 0.0; }

namespace {

using Vec3 = Eigen::Vector3d;

struct Simplex {
    std::array<Vec3, 4> pts;
    std::array<double, 4> f;
};

struct NmResult {
    Vec3 best;
    double value;
    int evaluations;
    bool converged;
};

template <typename F>
NmResult nelder_mead(F&& objective, const Vec3& start, double step, int budget, double tolerance) {
    Simplex s;
    s.pts[0] = start;
    for (int i = 0; i < 3; ++i) {
        s.pts[i + 1] = start;
        s.pts[i + 1](i) += step;
    }
    int evals = 0;
    auto eval = [&](const Vec3& p) {
        ++evals;
        const double v = objective(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    for (int i = 0; i < 4; ++i) s.f[i] = eval(s.pts[i]);

    bool converged = false;
    while (evals < budget) {
        std::array<int, 4> idx{0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return s.f[a] < s.f[b]; });
        Simplex sorted;
        for (int i = 0; i < 4; ++i) {
            sorted.pts[i] = s.pts[idx[i]];
            sorted.f[i] = s.f[idx[i]];
        }
        s = sorted;

        double diameter = 0.0;
        for (int i = 1; i < 4; ++i) diameter = std::max(diameter, (s.pts[i] - s.pts[0]).cwiseAbs().maxCoeff());
        if (s.f[3] - s.f[0] <= tolerance * (s.f[0] + 1e-12) || diameter < 1e-10) {
            converged = true;
            break;
        }

        const Vec3 centroid = (s.pts[0] + s.pts[1] + s.pts[2]) / 3.0;
        const Vec3 reflected = centroid + (centroid - s.pts[3]);
        const double fr = eval(reflected);
        if (fr < s.f[0]) {
            const Vec3 expanded = centroid + 2.0 * (centroid - s.pts[3]);
            const double fe = eval(expanded);
            if (fe < fr) {
                s.pts[3] = expanded;
                s.f[3] = fe;
            } else {
                s.pts[3] = reflected;
                s.f[3] = fr;
            }
            continue;
        }
        if (fr < s.f[2]) {
            s.pts[3] = reflected;
            s.f[3] = fr;
            continue;
        }
        const bool outside = fr < s.f[3];
        const Vec3 contracted = outside ? Vec3(centroid + 0.5 * (reflected - centroid))
                                        : Vec3(centroid + 0.5 * (s.pts[3] - centroid));
        const double fc = eval(contracted);
        if (fc < (outside ? fr : s.f[3])) {
            s.pts[3] = contracted;
            s.f[3] = fc;
            continue;
        }
        for (int i = 1; i < 4; ++i) {
            s.pts[i] = s.pts[0] + 0.5 * (s.pts[i] - s.pts[0]);
            s.f[i] = eval(s.pts[i]);
        }
    }
    const auto best = std::min_element(s.f.begin(), s.f.end()) - s.f.begin();
    return {s.pts[static_cast<std::size_t>(best)], s.f[static_cast<std::size_t>(best)], evals, converged};
}

GammaKernelFit from_log_params(const Vec3& p) {
    GammaKernelFit fit;
    fit.scale = std::exp(p(0));
    fit.shape = std::exp(p(1));
    fit.theta = std::exp(p(2));
    return fit;
}

}  // namespace

GammaKernelFit fit_gamma_kernel(const Eigen::VectorXd& ages, const Eigen::VectorXd& values,
                                const GammaFitOptions& opts) {
    const Eigen::Index n = ages.size();
    require(values.size() == n, "ages and values differ in length");
    require(n >= 5, "gamma-kernel fit needs at least five points");
    require(opts.restarts >= 1 && opts.max_evaluations >= opts.restarts, "invalid optimizer budget");
    require((ages.array() > 0.0).all(), "ages must be positive");
    require((values.array() >= 0.0).all(), "recovery curve must be non-negative");
    if (values.maxCoeff() <= 0.0) fail(Errc::InvalidArgument, "degenerate all-zero recovery curve");

    auto sse = [&](const Vec3& p) {
        const double c = std::exp(p(0)), k = std::exp(p(1)), th = std::exp(p(2));
        const Eigen::ArrayXd model = c * (ages.array().log() * (k - 1.0) - ages.array() / th).exp();
        return (values.array() - model).square().sum();
    };

    Eigen::Index peak_idx = 0;
    values.maxCoeff(&peak_idx);
    const double peak_age = std::max(ages(peak_idx), 1.0);
    const double peak_value = values(peak_idx);
    auto start_for = [&](double k, double theta) {
        // scale chosen so the kernel passes through the observed peak
        const double c = peak_value / (std::pow(peak_age, k - 1.0) * std::exp(-peak_age / theta));
        return Vec3(std::log(c), std::log(k), std::log(theta));
    };

    std::vector<Vec3> starts;
    starts.push_back(start_for(3.0, peak_age / 2.0));
    starts.push_back(Vec3(std::log(values.mean()), 0.0, std::log(1e4)));  // near-constant kernel
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> shape_draw(1.1, 8.0);
    while (static_cast<int>(starts.size()) < opts.restarts) {
        const double k = shape_draw(rng);
        starts.push_back(start_for(k, peak_age / (k - 1.0)));
    }
    starts.resize(static_cast<std::size_t>(opts.restarts));

    const int per_restart = opts.max_evaluations / opts.restarts;
    GammaKernelFit best;
    best.residual = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    int total_evals = 0;
    for (const auto& start : starts) {
        const auto r = nelder_mead(sse, start, 0.5, per_restart, opts.tolerance);
        total_evals += r.evaluations;
        any_converged = any_converged || r.converged;
        if (r.value < best.residual) {  // strict: ties keep the lower restart index
            best = from_log_params(r.best);
            best.residual = r.value;
        }
    }
    best.evaluations = total_evals;
    if (!any_converged) throw GammaFitError("gamma-kernel fit did not converge within the evaluation budget", best);
    return best;
}

double recovery_at(const GammaKernelFit& fit, double x) {
    require(x >= 1.0, "recovery is defined for ages >= 1");
    return std::clamp(fit(x), 0.0, 1.0);
}

void write_recovery_csv(std::ostream& out, const RecoveryPoints& points, const Eigen::VectorXd& smoothed,
                        const GammaKernelFit& fit) {
    require(smoothed.size() == points.size(), "smoothed curve does not match the points");
    csv::Writer w(out);
    w.row({"age", "raw_mean", "smoothed", "fitted"});
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        w.row({std::to_string(points.ages(i)), csv::format_double(points.values(i)), csv::format_double(smoothed(i)),
               csv::format_double(recovery_at(fit, points.ages(i)))});
    }
}

std::string fit_to_json(const GammaKernelFit& fit) {
    nlohmann::json doc{{"scale", fit.scale},       {"shape", fit.shape},
                       {"theta", fit.theta},       {"residual", fit.residual},
                       {"evaluations", fit.evaluations}, {"peak_age", fit.peak_age()}};
    return doc.dump(2);
}

GammaKernelFit fit_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        GammaKernelFit fit;
        fit.scale = doc.at("scale").get<double>();
        fit.shape = doc.at("shape").get<double>();
        fit.theta = doc.at("theta").get<double>();
        fit.residual = doc.value("residual", 0.0);
        fit.evaluations = doc.value("evaluations", 0);
        if (!(fit.scale > 0.0 && fit.shape > 0.0 && fit.theta > 0.0)) {
            fail(Errc::Schema, "gamma-kernel parameters must be positive");
        }
        return fit;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::Schema, std::string("invalid gamma-kernel JSON: ") + e.what());
    }
}

}  // namespace loanhazard
