#include "loanhazard/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "loanhazard/csv.hpp"

namespace loanhazard {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void SimConfig::validate() const {
    trunc.validate();
    require(n >= 1, "cohort size must be at least one");
    require(replicates >= 1, "replicate count must be at least one");
    require(theta > 0.0 && theta < 1.0, "theta must lie in (0,1)");
    require(threads >= 0, "thread count must be non-negative");
}

SimConfig table_b1_config() { return SimConfig{}; }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replicate_index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(~replicate_index));
}

namespace {

/// Smallest index k with u < cdf(k); the last index absorbs rounding.
int inverse_cdf(const Eigen::VectorXd& cdf, double u) {
    const auto* begin = cdf.data();
    const auto* end = begin + cdf.size();
    const auto* it = std::upper_bound(begin, end, u);
    return it == end ? static_cast<int>(cdf.size()) - 1 : static_cast<int>(it - begin);
}

struct Sampler {
    Eigen::VectorXd x_cdf;
    Eigen::VectorXd y_cdf;

    explicit Sampler(const SimConfig& c) {
        x_cdf.resize(c.dist.pmf().size());
        std::partial_sum(c.dist.pmf().begin(), c.dist.pmf().end(), x_cdf.begin());
        const int ny = c.trunc.hi - c.trunc.lo + 1;
        y_cdf.resize(ny);
        for (int k = 0; k < ny; ++k) y_cdf(k) = static_cast<double>(k + 1) / ny;
    }
};

std::vector<ObservedLoan> simulate(const SimConfig& config, const Sampler& s, std::uint64_t replicate_index) {
    std::mt19937_64 rng(stream_seed(config.seed, replicate_index));
    std::vector<ObservedLoan> out;
    out.reserve(static_cast<std::size_t>(config.n));
    for (long i = 0; i < config.n; ++i) {
        const int y = config.trunc.lo + inverse_cdf(s.y_cdf, uniform01(rng));
        const int x = config.dist.min_age() + inverse_cdf(s.x_cdf, uniform01(rng));
        const bool is_default = uniform01(rng) < config.dist.cause1_share(x);
        if (y > x) continue;
        const int c = y + config.trunc.censor_offset;
        ObservedLoan obs;
        obs.entry_age = y;
        obs.observed_event = x <= c;
        obs.exit_age = obs.observed_event ? x : c;
        if (obs.observed_event) obs.cause = is_default ? Cause::Default : Cause::Prepay;
        out.push_back(obs);
    }
    return out;
}

struct ReplicateResult {
    double retained = 0.0;
    // age-major, cause-minor; NaN where nobody was at risk
    std::vector<double> hazard;
    // 1 covered, 0 missed, -1 undefined CI
    std::vector<signed char> covered;
};

}  // namespace

std::vector<ObservedLoan> simulate_cohort(const SimConfig& config, std::uint64_t replicate_index) {
    config.validate();
    return simulate(config, Sampler(config), replicate_index);
}

double retention_probability(const CompetingRisksDistribution& dist, const TruncationLaw& trunc) {
    trunc.validate();
    double alpha = 0.0;
    for (int y = trunc.lo; y <= trunc.hi; ++y) {
        if (y > dist.max_age()) continue;
        alpha += trunc.probability(y) * dist.survival(std::max(y, dist.min_age()));
    }
    return alpha;
}

std::vector<TruthRow> analytic_truth(const CompetingRisksDistribution& dist, const TruncationLaw& trunc) {
    const double alpha = retention_probability(dist, trunc);
    if (!(alpha > 0.0)) fail(Errc::InvalidArgument, "truncation law discards every lifetime");
    std::vector<TruthRow> rows;
    for (int x = dist.min_age(); x <= dist.max_age(); ++x) {
        const double window = trunc.prob_in_window(x);
        const double u = window * dist.survival(x) / alpha;
        for (const Cause cause : kCauses) {
            TruthRow r;
            r.age = x;
            r.cause = cause;
            r.f_star = window * dist.joint(x, cause) / alpha;
            r.u_star = u;
            r.hazard = u > 0.0 ? r.f_star / u : kNaN;
            r.variance = u > 0.0 ? r.f_star * (u - r.f_star) / (u * u * u) : kNaN;
            rows.push_back(r);
        }
    }
    return rows;
}

std::optional<double> StudyRow::mc_se() const {
    if (!empirical_variance || estimated < 1) return std::nullopt;
    return std::sqrt(*empirical_variance / estimated);
}

std::optional<double> StudyRow::variance_ratio() const {
    if (!empirical_variance || !(asymptotic_variance > 0.0)) return std::nullopt;
    return *empirical_variance / asymptotic_variance;
}

const StudyRow& StudyReport::row(int age, Cause cause) const {
    const auto it = std::find_if(rows.begin(), rows.end(),
                                 [&](const StudyRow& r) { return r.age == age && r.cause == cause; });
    if (it == rows.end()) fail(Errc::UnknownKey, "no study row for age " + std::to_string(age));
    return *it;
}

StudyReport run_study(const SimConfig& config) {
    config.validate();
    const Sampler sampler(config);
    const auto truth = analytic_truth(config.dist, config.trunc);
    const double alpha = retention_probability(config.dist, config.trunc);
    const AgeRange ages = config.dist.ages();
    const std::size_t cells = truth.size();

    auto one = [&](std::uint64_t index) {
        const auto obs = simulate(config, sampler, index);
        ReplicateResult r;
        r.retained = static_cast<double>(obs.size()) / static_cast<double>(config.n);
        r.hazard.assign(cells, kNaN);
        r.covered.assign(cells, -1);
        if (obs.empty()) return r;
        for (const Cause cause : kCauses) {
            const auto curve = estimate_csh(obs, cause, ages, config.theta);
            for (std::size_t k = 0; k < curve.rows.size(); ++k) {
                const auto& row = curve.rows[k];
                const std::size_t cell = 2 * k + static_cast<std::size_t>(index_of(cause));
                if (!row.has_data()) continue;
                r.hazard[cell] = row.hazard;
                if (row.ci) r.covered[cell] = (row.ci->lo <= truth[cell].hazard && truth[cell].hazard <= row.ci->hi);
            }
        }
        return r;
    };

    // each replicate owns its slot, so the reduction below runs in index order
    std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = std::min(config.threads > 0 ? config.threads : static_cast<int>(hw), config.replicates);
    if (workers <= 1) {
        for (std::size_t i = 0; i < results.size(); ++i) results[i] = one(i);
    } else {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = static_cast<std::size_t>(w); i < results.size();
                         i += static_cast<std::size_t>(workers)) results[i] = one(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        pool.clear();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    StudyReport rep;
    rep.n = config.n;
    rep.replicates = config.replicates;
    rep.seed = config.seed;
    rep.theta = config.theta;
    rep.censor_offset = config.trunc.censor_offset;
    rep.alpha = alpha;
    for (const auto& r : results) rep.alpha_hat += r.retained;
    rep.alpha_hat /= config.replicates;
    rep.truncation_fraction = 1.0 - rep.alpha_hat;
    rep.variances_defined = config.replicates >= 2;

    for (std::size_t cell = 0; cell < cells; ++cell) {
        const auto& t = truth[cell];
        StudyRow row;
        row.age = t.age;
        row.cause = t.cause;
        row.true_hazard = t.hazard;
        row.f_star = t.f_star;
        row.u_star = t.u_star;
        row.asymptotic_variance = t.variance / (alpha * static_cast<double>(config.n));
        double sum = 0.0;
        int covered = 0;
        for (const auto& r : results) {
            if (!std::isnan(r.hazard[cell])) {
                sum += r.hazard[cell];
                ++row.estimated;
            }
            if (r.covered[cell] >= 0) {
                ++row.ci_defined;
                covered += r.covered[cell];
            }
        }
        row.mean = row.estimated > 0 ? sum / row.estimated : kNaN;
        if (row.estimated >= 2) {
            double ss = 0.0;
            for (const auto& r : results) {
                if (!std::isnan(r.hazard[cell])) ss += (r.hazard[cell] - row.mean) * (r.hazard[cell] - row.mean);
            }
            row.empirical_variance = ss / (row.estimated - 1);
        }
        if (row.ci_defined > 0) row.coverage = static_cast<double>(covered) / row.ci_defined;
        rep.rows.push_back(row);
    }

    // pairwise-complete correlation across ages, one matrix per cause
    const int m = ages.size();
    for (const Cause cause : kCauses) {
        Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(m, m, kNaN);
        const auto c = static_cast<std::size_t>(index_of(cause));
        for (int i = 0; i < m; ++i) {
            for (int j = i; j < m; ++j) {
                const std::size_t a = 2 * static_cast<std::size_t>(i) + c;
                const std::size_t b = 2 * static_cast<std::size_t>(j) + c;
                double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
                int k = 0;
                for (const auto& r : results) {
                    const double va = r.hazard[a], vb = r.hazard[b];
                    if (std::isnan(va) || std::isnan(vb)) continue;
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                    ++k;
                }
                if (k < 2) continue;
                const double cov = sab - sa * sb / k;
                const double va = saa - sa * sa / k;
                const double vb = sbb - sb * sb / k;
                if (va > 0.0 && vb > 0.0) corr(i, j) = corr(j, i) = cov / std::sqrt(va * vb);
            }
        }
        rep.correlation.push_back(std::move(corr));
    }
    return rep;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string report_to_json(const StudyReport& report) {
    nlohmann::json doc;
    doc["n"] = report.n;
    doc["replicates"] = report.replicates;
    doc["seed"] = report.seed;
    doc["theta"] = report.theta;
    doc["censor_offset"] = report.censor_offset;
    doc["alpha"] = report.alpha;
    doc["alpha_hat"] = report.alpha_hat;
    doc["truncation_fraction"] = report.truncation_fraction;
    doc["variances_defined"] = report.variances_defined;
    if (!report.variances_defined) doc["warning"] = "single replicate: empirical variances and correlations undefined";
    auto& rows = doc["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"age", r.age},
                        {"cause", std::string(to_string(r.cause))},
                        {"true_hazard", num(r.true_hazard)},
                        {"f_star", r.f_star},
                        {"u_star", r.u_star},
                        {"mean_hazard", num(r.mean)},
                        {"empirical_variance", opt(r.empirical_variance)},
                        {"asymptotic_variance", num(r.asymptotic_variance)},
                        {"coverage", opt(r.coverage)},
                        {"estimated_replicates", r.estimated},
                        {"ci_defined_replicates", r.ci_defined}});
    }
    auto& corr = doc["correlation"] = nlohmann::json::object();
    for (std::size_t c = 0; c < report.correlation.size(); ++c) {
        const auto& mtx = report.correlation[c];
        auto rows_json = nlohmann::json::array();
        for (Eigen::Index i = 0; i < mtx.rows(); ++i) {
            auto row = nlohmann::json::array();
            for (Eigen::Index j = 0; j < mtx.cols(); ++j) row.push_back(num(mtx(i, j)));
            rows_json.push_back(std::move(row));
        }
        corr[std::string(to_string(kCauses[c]))] = std::move(rows_json);
    }
    return doc.dump(2);
}

void write_report_csv(std::ostream& out, const StudyReport& report) {
    auto cell = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
    csv::Writer w(out);
    w.row({"age", "cause", "true_hazard", "mean_hazard", "empirical_variance", "asymptotic_variance", "coverage",
           "f_star", "u_star", "estimated_replicates"});
    for (const auto& r : report.rows) {
        w.row({std::to_string(r.age), std::string(to_string(r.cause)), csv::format_double(r.true_hazard),
               csv::format_double(r.mean), cell(r.empirical_variance), csv::format_double(r.asymptotic_variance),
               cell(r.coverage), csv::format_double(r.f_star), csv::format_double(r.u_star),
               std::to_string(r.estimated)});
    }
}

}  // namespace loanhazard
