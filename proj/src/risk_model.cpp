#include "loanhazard/risk_model.hpp"

#include <cmath>
#include <json.hpp>

namespace loanhazard {

namespace {
constexpr double kMassTolerance = 1e-9;
}

CompetingRisksDistribution::CompetingRisksDistribution(int min_age, Eigen::VectorXd pmf,
                                                       Eigen::VectorXd cause1_share)
    : min_age_(min_age), pmf_(std::move(pmf)), cause1_share_(std::move(cause1_share)) {
    require(min_age_ >= 0, "min_age must be non-negative");
    require(pmf_.size() >= 1, "pmf must have at least one age");
    require(pmf_.size() == cause1_share_.size(), "pmf and cause1_share lengths differ");
    for (Eigen::Index k = 0; k < pmf_.size(); ++k) {
        require(std::isfinite(pmf_(k)) && pmf_(k) >= 0.0, "pmf entries must be non-negative");
        require(cause1_share_(k) >= 0.0 && cause1_share_(k) <= 1.0, "cause1_share entries must lie in [0,1]");
    }
    require(std::abs(pmf_.sum() - 1.0) <= kMassTolerance, "pmf must sum to one");

    const Eigen::Index n = pmf_.size();
    tail_.resize(n + 1);
    tail_(n) = 0.0;
    for (Eigen::Index k = n - 1; k >= 0; --k) tail_(k) = tail_(k + 1) + pmf_(k);
    // pin the head so survival(min_age) is exactly one
    tail_(0) = 1.0;
}

CompetingRisksDistribution CompetingRisksDistribution::from_hazards(int min_age,
                                                                   const Eigen::VectorXd& default_hazard,
                                                                   const Eigen::VectorXd& prepay_hazard) {
    require(default_hazard.size() == prepay_hazard.size() && default_hazard.size() >= 1,
            "hazard paths must be non-empty and of equal length");
    const Eigen::Index n = default_hazard.size();
    require(std::abs(default_hazard(n - 1) + prepay_hazard(n - 1) - 1.0) <= kMassTolerance,
            "the final all-cause hazard must be one");
    const auto table = event_probs_from_hazards(default_hazard, prepay_hazard);
    Eigen::VectorXd pmf = table.rowwise().sum();
    Eigen::VectorXd share(n);
    for (Eigen::Index k = 0; k < n; ++k) share(k) = pmf(k) > 0.0 ? table(k, 0) / pmf(k) : 0.0;
    return CompetingRisksDistribution(min_age, std::move(pmf), std::move(share));
}

void CompetingRisksDistribution::check_age(int x, int hi) const {
    if (x < min_age_ || x > hi) {
        fail(Errc::InvalidArgument, "age " + std::to_string(x) + " outside [" + std::to_string(min_age_) + ", " +
                                        std::to_string(hi) + "]");
    }
}

double CompetingRisksDistribution::pmf(int x) const {
    check_age(x, max_age());
    return pmf_(x - min_age_);
}

double CompetingRisksDistribution::cause1_share(int x) const {
    check_age(x, max_age());
    return cause1_share_(x - min_age_);
}

double CompetingRisksDistribution::joint(int x, Cause cause) const {
    const double share = cause1_share(x);
    return pmf(x) * (cause == Cause::Default ? share : 1.0 - share);
}

double CompetingRisksDistribution::survival(int x) const {
    check_age(x, max_age() + 1);
    return tail_(x - min_age_);
}

double CompetingRisksDistribution::survival_by_hazard_product(int x) const {
    check_age(x, max_age() + 1);
    double s = 1.0;
    for (int k = min_age_; k < x; ++k) {
        if (tail_(k - min_age_) <= 0.0) return 0.0;
        s *= 1.0 - all_cause_hazard(k);
    }
    return s;
}

double CompetingRisksDistribution::all_cause_hazard(int x) const {
    check_age(x, max_age());
    const double s = tail_(x - min_age_);
    if (s <= 0.0) fail(Errc::InvalidArgument, "zero survival mass at age " + std::to_string(x));
    return pmf_(x - min_age_) / s;
}

double CompetingRisksDistribution::cause_specific_hazard(int x, Cause cause) const {
    check_age(x, max_age());
    const double s = tail_(x - min_age_);
    if (s <= 0.0) fail(Errc::InvalidArgument, "zero survival mass at age " + std::to_string(x));
    return joint(x, cause) / s;
}

Eigen::VectorXd CompetingRisksDistribution::hazard_path(Cause cause) const {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(pmf_.size());
    for (int x = min_age_; x <= max_age(); ++x) {
        if (tail_(x - min_age_) > 0.0) h(x - min_age_) = cause_specific_hazard(x, cause);
    }
    return h;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> CompetingRisksDistribution::conditional_event_probs(int x) const {
    check_age(x, max_age());
    if (tail_(x - min_age_) <= 0.0) fail(Errc::InvalidArgument, "zero survival mass at age " + std::to_string(x));
    const Eigen::Index start = x - min_age_;
    const Eigen::Index rows = pmf_.size() - start;
    Eigen::VectorXd h01(rows), h02(rows);
    for (Eigen::Index k = 0; k < rows; ++k) {
        const int age = x + static_cast<int>(k);
        const bool alive = tail_(start + k) > 0.0;
        h01(k) = alive ? cause_specific_hazard(age, Cause::Default) : 0.0;
        h02(k) = alive ? cause_specific_hazard(age, Cause::Prepay) : 0.0;
    }
    return event_probs_from_hazards(h01, h02);
}

CompetingRisksDistribution table_b1_distribution() {
    Eigen::VectorXd pmf(10), share(10);
    pmf << 0.04, 0.06, 0.10, 0.14, 0.09, 0.06, 0.14, 0.18, 0.07, 0.12;
    share << 0.66, 0.20, 0.45, 0.87, 0.20, 0.81, 0.05, 0.78, 0.25, 0.42;
    return CompetingRisksDistribution(1, std::move(pmf), std::move(share));
}

void TruncationLaw::validate() const {
    require(lo >= 1, "truncation lower bound must be >= 1");
    require(hi >= lo, "truncation upper bound must be >= lower bound");
    require(censor_offset >= 0, "censor offset must be non-negative");
}

double TruncationLaw::probability(int y) const {
    return (y >= lo && y <= hi) ? 1.0 / static_cast<double>(hi - lo + 1) : 0.0;
}

double TruncationLaw::prob_in_window(int x) const {
    // y must satisfy max(lo, x - offset) <= y <= min(hi, x)
    const int a = std::max(lo, x - censor_offset);
    const int b = std::min(hi, x);
    return b >= a ? static_cast<double>(b - a + 1) / static_cast<double>(hi - lo + 1) : 0.0;
}

std::string to_json(const CompetingRisksDistribution& dist) {
    nlohmann::json doc;
    doc["min_age"] = dist.min_age();
    doc["max_age"] = dist.max_age();
    doc["pmf"] = std::vector<double>(dist.pmf().data(), dist.pmf().data() + dist.pmf().size());
    doc["cause1_share"] =
        std::vector<double>(dist.cause1_share().data(), dist.cause1_share().data() + dist.cause1_share().size());
    return doc.dump(2);
}

CompetingRisksDistribution distribution_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
        const int min_age = doc.at("min_age").get<int>();
        const int max_age = doc.at("max_age").get<int>();
        const auto pmf = doc.at("pmf").get<std::vector<double>>();
        const auto share = doc.at("cause1_share").get<std::vector<double>>();
        if (max_age < min_age || static_cast<int>(pmf.size()) != max_age - min_age + 1) {
            fail(Errc::Schema, "pmf length does not match [min_age, max_age]");
        }
        return CompetingRisksDistribution(min_age, Eigen::Map<const Eigen::VectorXd>(pmf.data(), pmf.size()),
                                          Eigen::Map<const Eigen::VectorXd>(share.data(), share.size()));
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::Schema, std::string("invalid distribution JSON: ") + e.what());
    }
}

}  // namespace loanhazard
