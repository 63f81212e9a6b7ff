#include "loanhazard/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "loanhazard/csv.hpp"
#include "loanhazard/error.hpp"
#include "loanhazard/normal.hpp"

namespace loanhazard {

AgeRange HazardCurve::ages() const {
    require(!rows.empty(), "empty hazard curve");
    return {rows.front().age, rows.back().age};
}

const HazardRow* HazardCurve::find(int age) const {
    if (rows.empty() || age < rows.front().age || age > rows.back().age) return nullptr;
    return &rows[static_cast<std::size_t>(age - rows.front().age)];
}

const HazardRow& HazardCurve::at(int age) const {
    const auto* row = find(age);
    if (!row) fail(Errc::InvalidArgument, "age " + std::to_string(age) + " not on the curve grid");
    return *row;
}

Eigen::VectorXd HazardCurve::hazards() const {
    Eigen::VectorXd h(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) h(static_cast<Eigen::Index>(k)) = rows[k].hazard;
    return h;
}

double asymptotic_variance(double f, double u, long n) {
    require(n > 0, "sample size must be positive");
    if (!(u > 0.0)) fail(Errc::InvalidArgument, "at-risk fraction is zero");
    require(f >= 0.0 && f <= u, "event fraction must lie in [0, U]");
    return f * (u - f) / (static_cast<double>(n) * u * u * u);
}

std::optional<Interval> confidence_interval(double f, double u, long n, double theta) {
    const double z = two_sided_z(theta);
    require(n > 0, "sample size must be positive");
    if (!(u > 0.0) || !(f > 0.0) || !(f < u)) return std::nullopt;
    const double half_width = z * std::sqrt((u - f) / (static_cast<double>(n) * u * f));
    const double log_hazard = std::log(f / u);
    return Interval{std::exp(log_hazard - half_width), std::min(1.0, std::exp(log_hazard + half_width))};
}

double asymptotic_variance_counts(long events, long at_risk) {
    if (at_risk <= 0) fail(Errc::InvalidArgument, "nobody at risk");
    require(events >= 0 && events <= at_risk, "event count must lie in [0, at_risk]");
    const double e = static_cast<double>(events), a = static_cast<double>(at_risk);
    return e * (a - e) / (a * a * a);
}

std::optional<Interval> confidence_interval_counts(long events, long at_risk, double theta) {
    const double z = two_sided_z(theta);
    if (events <= 0 || events >= at_risk) return std::nullopt;
    const double e = static_cast<double>(events), a = static_cast<double>(at_risk);
    const double half_width = z * std::sqrt((a - e) / (a * e));
    const double log_hazard = std::log(e / a);
    return Interval{std::exp(log_hazard - half_width), std::min(1.0, std::exp(log_hazard + half_width))};
}

namespace {

// events[k], at_risk[k] for age lo + k. `match` selects which events count.
template <typename Match>
HazardCurve count_curve(std::span<const ObservedLoan> obs, AgeRange ages, double theta, Match match) {
    if (obs.empty()) fail(Errc::EmptyResult, "no observations to estimate from");
    require(ages.lo >= 1 && ages.hi >= ages.lo, "age range must satisfy 1 <= lo <= hi");
    (void)two_sided_z(theta);

    const auto width = static_cast<std::size_t>(ages.size());
    std::vector<long> events(width, 0);
    std::vector<long> delta(width + 1, 0);  // difference array for the at-risk counts
    for (const auto& o : obs) {
        const int first = std::max(o.entry_age, ages.lo);
        const int last = std::min(o.exit_age, ages.hi);
        if (first <= last) {
            ++delta[static_cast<std::size_t>(first - ages.lo)];
            --delta[static_cast<std::size_t>(last - ages.lo + 1)];
        }
        if (o.observed_event && ages.contains(o.exit_age) && match(o)) {
            ++events[static_cast<std::size_t>(o.exit_age - ages.lo)];
        }
    }

    HazardCurve curve;
    curve.n = static_cast<long>(obs.size());
    curve.theta = theta;
    curve.rows.reserve(width);
    long running = 0;
    for (std::size_t k = 0; k < width; ++k) {
        running += delta[k];
        HazardRow row;
        row.age = ages.lo + static_cast<int>(k);
        row.events = events[k];
        row.at_risk = running;
        if (row.has_data()) {
            row.hazard = static_cast<double>(row.events) / static_cast<double>(row.at_risk);
            row.variance = asymptotic_variance_counts(row.events, row.at_risk);
            row.ci = confidence_interval_counts(row.events, row.at_risk, theta);
        }
        curve.rows.push_back(row);
    }
    return curve;
}

}  // namespace

HazardCurve estimate_csh(std::span<const ObservedLoan> obs, Cause cause, AgeRange ages, double theta) {
    auto curve = count_curve(obs, ages, theta, [cause](const ObservedLoan& o) { return o.cause == cause; });
    curve.cause = cause;
    return curve;
}

HazardCurve estimate_all_cause(std::span<const ObservedLoan> obs, AgeRange ages, double theta) {
    return count_curve(obs, ages, theta, [](const ObservedLoan&) { return true; });
}

std::vector<std::optional<double>> asymptotic_variance(const HazardCurve& curve) {
    std::vector<std::optional<double>> out;
    out.reserve(curve.rows.size());
    for (const auto& r : curve.rows) {
        out.push_back(r.has_data() ? std::optional(asymptotic_variance_counts(r.events, r.at_risk)) : std::nullopt);
    }
    return out;
}

std::vector<std::optional<Interval>> confidence_interval(const HazardCurve& curve, double theta) {
    std::vector<std::optional<Interval>> out;
    out.reserve(curve.rows.size());
    for (const auto& r : curve.rows) out.push_back(confidence_interval_counts(r.events, r.at_risk, theta));
    return out;
}

HazardCurve with_theta(HazardCurve curve, double theta) {
    const auto cis = confidence_interval(curve, theta);
    for (std::size_t k = 0; k < curve.rows.size(); ++k) {
        if (!curve.rows[k].interpolated) curve.rows[k].ci = cis[k];
    }
    curve.theta = theta;
    return curve;
}

HazardCurve interpolate_zero_defaults(HazardCurve curve) {
    std::optional<double> carry;
    for (const auto& r : curve.rows) {
        if (r.has_data() && r.events > 0) {
            carry = r.hazard;
            break;
        }
    }
    if (!carry) fail(Errc::InvalidArgument, "cannot interpolate a curve with no events");
    for (auto& r : curve.rows) {
        if (!r.has_data()) continue;
        if (r.events > 0) {
            carry = r.hazard;
        } else {
            r.hazard = *carry;
            r.interpolated = true;
        }
    }
    return curve;
}

// --- export -----------------------------------------------------------------

namespace {

const std::vector<std::string> kCurveColumns{"band", "cause", "age", "events", "at_risk", "hazard",
                                             "var",  "ci_lo", "ci_hi", "interpolated"};

}  // namespace

void write_curve_csv(std::ostream& out, const HazardCurve& curve) {
    csv::Writer w(out);
    w.row(kCurveColumns);
    for (const auto& r : curve.rows) {
        if (!r.has_data()) continue;
        w.row({curve.band, std::string(to_string(curve.cause)), std::to_string(r.age), std::to_string(r.events),
               std::to_string(r.at_risk), csv::format_double(r.hazard), csv::format_double(r.variance),
               r.ci ? csv::format_double(r.ci->lo) : "", r.ci ? csv::format_double(r.ci->hi) : "",
               r.interpolated ? "1" : "0"});
    }
}

std::string curve_to_json(const HazardCurve& curve) {
    nlohmann::json doc;
    doc["band"] = curve.band;
    doc["cause"] = std::string(to_string(curve.cause));
    doc["n"] = curve.n;
    doc["theta"] = curve.theta;
    auto& rows = doc["rows"] = nlohmann::json::array();
    for (const auto& r : curve.rows) {
        if (!r.has_data()) continue;
        nlohmann::json row{{"age", r.age},         {"events", r.events},     {"at_risk", r.at_risk},
                           {"hazard", r.hazard},   {"var", r.variance},      {"interpolated", r.interpolated}};
        row["ci_lo"] = r.ci ? nlohmann::json(r.ci->lo) : nlohmann::json(nullptr);
        row["ci_hi"] = r.ci ? nlohmann::json(r.ci->hi) : nlohmann::json(nullptr);
        rows.push_back(std::move(row));
    }
    return doc.dump(2);
}

HazardCurve read_curve_csv(const std::string& text) {
    const auto t = csv::parse(text);
    std::vector<std::string_view> cols(kCurveColumns.begin(), kCurveColumns.end());
    t.require_columns(cols);
    if (t.size() == 0) fail(Errc::Schema, "curve CSV has no rows");

    HazardCurve curve;
    std::map<int, HazardRow> by_age;
    for (const auto& row : t.rows()) {
        auto col = [&](std::string_view name) -> const std::string& { return row[t.column(name)]; };
        if (by_age.empty()) {
            curve.band = col("band");
            try {
                curve.cause = parse_cause(col("cause"));
            } catch (const Error&) {
                fail(Errc::Schema, "invalid cause '" + col("cause") + "'");
            }
        } else if (col("band") != curve.band || parse_cause(col("cause")) != curve.cause) {
            fail(Errc::Schema, "curve CSV mixes bands or causes");
        }
        HazardRow r;
        r.age = static_cast<int>(csv::parse_int(col("age"), "age"));
        r.events = static_cast<long>(csv::parse_int(col("events"), "events"));
        r.at_risk = static_cast<long>(csv::parse_int(col("at_risk"), "at_risk"));
        r.hazard = csv::parse_double(col("hazard"), "hazard");
        r.variance = csv::parse_double(col("var"), "var");
        if (!col("ci_lo").empty() && !col("ci_hi").empty()) {
            r.ci = Interval{csv::parse_double(col("ci_lo"), "ci_lo"), csv::parse_double(col("ci_hi"), "ci_hi")};
        }
        r.interpolated = csv::parse_bool(col("interpolated"), "interpolated");
        if (r.events < 0 || r.at_risk <= 0 || r.events > r.at_risk) {
            fail(Errc::Schema, "inconsistent counts at age " + std::to_string(r.age));
        }
        if (!by_age.emplace(r.age, r).second) fail(Errc::Schema, "duplicate age " + std::to_string(r.age));
    }
    const int lo = by_age.begin()->first, hi = by_age.rbegin()->first;
    for (int age = lo; age <= hi; ++age) {
        auto it = by_age.find(age);
        if (it != by_age.end()) {
            curve.rows.push_back(it->second);
            curve.n = std::max(curve.n, it->second.at_risk);
        } else {
            HazardRow empty;
            empty.age = age;
            curve.rows.push_back(empty);
        }
    }
    return curve;
}

HazardCurve read_curve_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Schema, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_curve_csv(buf.str());
}

}  // namespace loanhazard
