// loanhazard: command-line front end for the hazard, convergence, return,
// savings, recovery and simulation pipeline.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "loanhazard/actuarial.hpp"
#include "loanhazard/convergence.hpp"
#include "loanhazard/csv.hpp"
#include "loanhazard/estimator.hpp"
#include "loanhazard/ingest.hpp"
#include "loanhazard/manifest.hpp"
#include "loanhazard/montecarlo.hpp"
#include "loanhazard/recovery.hpp"

namespace fs = std::filesystem;
using namespace loanhazard;

namespace {

struct Globals {
    std::uint64_t seed = 7;
    double theta = kDefaultTheta;
    std::string output_dir = ".";
    std::string format = "csv";

    bool json() const { return format == "json"; }
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Schema, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Collects outputs and writes them together with the manifest sidecar.
class Run {
  public:
    Run(const Globals& g, std::string command) : g_(g) {
        manifest_.command = std::move(command);
        manifest_.set("theta", csv::format_double(g.theta));
        manifest_.set("format", g.format);
    }

    RunManifest& manifest() { return manifest_; }

    void output(const std::string& name, const std::string& bytes) {
        fs::create_directories(g_.output_dir);
        const std::string path = (fs::path(g_.output_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(Errc::Schema, "cannot write '" + path + "'");
        out << bytes;
        manifest_.add_output(path, bytes);
        std::cout << path << "\n";
    }

    void finish() {
        const std::string path = (fs::path(g_.output_dir) / (manifest_.command + ".manifest.json")).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(Errc::Schema, "cannot write '" + path + "'");
        out << manifest_.to_json();
    }

  private:
    const Globals& g_;
    RunManifest manifest_;
};

template <typename F>
std::string render(F&& write) {
    std::ostringstream ss;
    write(ss);
    return ss.str();
}

AgeRange parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) fail(Errc::InvalidArgument, "window must look like LO:HI");
    const auto lo = static_cast<int>(csv::parse_int(text.substr(0, colon), "window"));
    const auto hi = static_cast<int>(csv::parse_int(text.substr(colon + 1), "window"));
    require(lo >= 1 && hi >= lo, "window must satisfy 1 <= LO <= HI");
    return {lo, hi};
}

std::vector<ObservedLoan> band_slice(const std::vector<BandObservation>& rows, RiskBand band) {
    std::vector<ObservedLoan> out;
    for (const auto& r : rows) {
        if (r.band == band) out.push_back(r.obs);
    }
    if (out.empty()) fail(Errc::UnknownKey, "band '" + std::string(to_string(band)) + "' has no observations");
    return out;
}

HazardCurve estimate_band(const std::vector<BandObservation>& rows, RiskBand band, Cause cause, AgeRange window,
                          double theta) {
    const auto obs = band_slice(rows, band);
    auto curve = estimate_csh(obs, cause, window, theta);
    curve.band = std::string(to_string(band));
    return curve;
}

// --- ingest -----------------------------------------------------------------

struct IngestArgs {
    std::string loans, payments;
    bool no_filter = false;
    long pad_cents = 1000;
};

void cmd_ingest(const Globals& g, const IngestArgs& a) {
    Run run(g, "ingest");
    run.manifest().add_input(a.loans);
    run.manifest().add_input(a.payments);
    run.manifest().set("no_filter", a.no_filter ? "true" : "false");
    run.manifest().set("pad_cents", std::to_string(a.pad_cents));

    const auto records = read_loan_files(a.loans, a.payments);
    FilterPolicy policy;
    if (a.no_filter) {
        policy = FilterPolicy{false, std::nullopt, false, std::nullopt, false, std::nullopt, {}, true};
    }
    const auto rows = build_observations(records, policy, Money::from_cents(a.pad_cents));
    if (rows.empty()) fail(Errc::EmptyResult, "no loans left after filtering");

    if (g.json()) {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& r : rows) {
            doc.push_back({{"loan_id", r.loan_id},
                           {"band", std::string(to_string(r.band))},
                           {"entry_age", r.obs.entry_age},
                           {"exit_age", r.obs.exit_age},
                           {"event", r.obs.observed_event},
                           {"cause", r.obs.cause ? nlohmann::json(std::string(to_string(*r.obs.cause)))
                                                 : nlohmann::json(nullptr)}});
        }
        run.output("observations.json", doc.dump(2) + "\n");
    } else {
        run.output("observations.csv", render([&](std::ostream& o) { write_observations_csv(o, rows); }));
    }
    run.finish();
}

// --- estimate ---------------------------------------------------------------

struct EstimateArgs {
    std::string observations, band, cause = "default", window = "10:55";
    bool interpolate = false;
};

void cmd_estimate(const Globals& g, const EstimateArgs& a) {
    Run run(g, "estimate");
    run.manifest().add_input(a.observations);
    run.manifest().set("band", a.band);
    run.manifest().set("cause", a.cause);
    run.manifest().set("window", a.window);
    run.manifest().set("interpolate", a.interpolate ? "true" : "false");

    const RiskBand band = parse_risk_band(a.band);
    const Cause cause = parse_cause(a.cause);
    const AgeRange window = parse_window(a.window);
    const auto rows = read_observation_file(a.observations);
    auto curve = estimate_band(rows, band, cause, window, g.theta);
    if (a.interpolate) curve = interpolate_zero_defaults(std::move(curve));

    const std::string stem = "curve_" + a.band + "_" + a.cause;
    if (g.json()) {
        run.output(stem + ".json", curve_to_json(curve) + "\n");
    } else {
        run.output(stem + ".csv", render([&](std::ostream& o) { write_curve_csv(o, curve); }));
    }
    run.finish();
}

// --- converge ---------------------------------------------------------------

struct ConvergeArgs {
    std::vector<std::string> curves;
    std::string observations;
    std::vector<std::string> bands;
    std::string window = "10:55";
    int min_age = 10;
    int run_length = 2;
};

void cmd_converge(const Globals& g, const ConvergeArgs& a) {
    Run run(g, "converge");
    run.manifest().set("min_age", std::to_string(a.min_age));
    run.manifest().set("run", std::to_string(a.run_length));

    std::vector<HazardCurve> curves;
    std::vector<std::string> order;
    if (!a.curves.empty()) {
        for (const auto& path : a.curves) {
            run.manifest().add_input(path);
            auto c = read_curve_file(path);
            c = with_theta(std::move(c), g.theta);
            order.push_back(c.band);
            curves.push_back(std::move(c));
        }
    } else {
        if (a.observations.empty()) fail(Errc::InvalidArgument, "give --curves or --observations with --bands");
        run.manifest().add_input(a.observations);
        run.manifest().set("window", a.window);
        const AgeRange window = parse_window(a.window);
        const auto rows = read_observation_file(a.observations);
        std::vector<std::string> bands = a.bands;
        if (bands.empty()) {
            for (const RiskBand b : kRiskBands) bands.emplace_back(to_string(b));
        }
        for (const auto& name : bands) {
            const RiskBand b = parse_risk_band(name);
            curves.push_back(estimate_band(rows, b, Cause::Default, window, g.theta));
            order.push_back(curves.back().band);
        }
    }

    ConvergenceOptions opts;
    opts.min_test_age = a.min_age;
    opts.run_length = a.run_length;
    const auto matrix = transition_matrix(curves, order, opts);
    if (g.json()) {
        run.output("matrix.json", matrix_to_json(matrix) + "\n");
    } else {
        run.output("matrix.csv", render([&](std::ostream& o) { write_matrix_csv(o, matrix); }));
    }
    run.output("trace.csv", render([&](std::ostream& o) { write_trace_csv(o, matrix); }));
    run.finish();
}

// --- returns ----------------------------------------------------------------

struct ReturnsArgs {
    double loan = 100.0;
    double apr = 0.0;  // percent
    int term = 72;
    std::string default_curve, prepay_curve, recovery_fit, band = "all";
    double recovery = 0.0;
};

void cmd_returns(const Globals& g, const ReturnsArgs& a) {
    Run run(g, "returns");
    run.manifest().set("loan", csv::format_double(a.loan));
    run.manifest().set("apr", csv::format_double(a.apr));
    run.manifest().set("term", std::to_string(a.term));
    run.manifest().set("band", a.band);

    require(a.apr >= 0.0, "APR must be non-negative");
    const auto schedule = make_schedule(a.loan, a.apr / 100.0 / 12.0, a.term);

    HazardPath path;
    path.first_age = 0;
    if (!a.default_curve.empty() || !a.prepay_curve.empty()) {
        require(!a.default_curve.empty() && !a.prepay_curve.empty(), "--default-curve and --prepay-curve go together");
        run.manifest().add_input(a.default_curve);
        run.manifest().add_input(a.prepay_curve);
        path = hazard_path_from_curves(read_curve_file(a.default_curve), read_curve_file(a.prepay_curve), 0,
                                       a.term - 1);
    } else {
        path.default_hazard = Eigen::VectorXd::Zero(a.term);
        path.prepay_hazard = Eigen::VectorXd::Zero(a.term);
    }

    RecoveryFunction recovery;
    if (!a.recovery_fit.empty()) {
        run.manifest().add_input(a.recovery_fit);
        const auto fit = fit_from_json(read_text(a.recovery_fit));
        recovery = [fit](int age) { return recovery_at(fit, age); };
    } else {
        run.manifest().set("recovery", csv::format_double(a.recovery));
        recovery = constant_recovery(a.recovery);
    }

    std::vector<ReturnRow> rows;
    for (int x = 0; x < a.term; ++x) {
        ReturnRow r;
        r.band = a.band;
        r.age = x;
        const double one = one_month_return(path.at(Cause::Default, x), schedule.balance(x),
                                            schedule.balance(x + 1), schedule.payment,
                                            recovery(x + 1) * schedule.principal);
        r.one_month_annualized = annualize(one);
        try {
            r.lifetime_annualized = annualize(lifetime_return(schedule, path, recovery, x));
        } catch (const Error& e) {
            if (e.code() != Errc::Numerical) throw;
            std::cerr << "warning: age " << x << ": " << e.what() << "\n";
        }
        rows.push_back(std::move(r));
    }

    if (g.json()) {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& r : rows) {
            doc.push_back({{"band", r.band},
                           {"age", r.age},
                           {"one_month_return_annualized", r.one_month_annualized},
                           {"lifetime_return_annualized", r.lifetime_annualized
                                                              ? nlohmann::json(*r.lifetime_annualized)
                                                              : nlohmann::json(nullptr)}});
        }
        run.output("returns.json", doc.dump(2) + "\n");
    } else {
        run.output("returns.csv", render([&](std::ostream& o) { write_returns_csv(o, rows); }));
    }
    run.finish();
}

// --- savings ----------------------------------------------------------------

struct SavingsArgs {
    std::string table;
    double balance = 0.0, payment = 0.0, apr = 0.0, new_apr = 0.0;
    std::string payoff_rate = "effective", total = "payoff";
    int term = 72;
    std::optional<int> age;
};

void cmd_savings(const Globals& g, const SavingsArgs& a) {
    Run run(g, "savings");
    run.manifest().set("payoff_rate", a.payoff_rate);
    run.manifest().set("total", a.total);
    run.manifest().set("term", std::to_string(a.term));

    SavingsConvention conv;
    conv.payoff_rate = a.payoff_rate == "nominal" ? PayoffRate::Nominal : PayoffRate::EffectiveAnnual;
    conv.total = a.total == "remaining" ? TotalSavings::TimesRemainingTerm : TotalSavings::TimesPayoffCount;
    conv.original_term = a.term;

    std::vector<SavingsRow> inputs;
    if (!a.table.empty()) {
        run.manifest().add_input(a.table);
        const auto t = csv::read_file(a.table);
        t.require_columns({"balance", "payment", "apr", "new_apr"});
        for (const auto& row : t.rows()) {
            SavingsRow r;
            r.band = t.has_column("band") ? row[t.column("band")] : "";
            if (t.has_column("age") && !row[t.column("age")].empty()) {
                r.age = static_cast<int>(csv::parse_int(row[t.column("age")], "age"));
            }
            r.balance = csv::parse_double(row[t.column("balance")], "balance");
            r.payment = csv::parse_double(row[t.column("payment")], "payment");
            r.apr_pct = csv::parse_double(row[t.column("apr")], "apr");
            r.new_apr_pct = csv::parse_double(row[t.column("new_apr")], "new_apr");
            inputs.push_back(std::move(r));
        }
        if (inputs.empty()) fail(Errc::EmptyResult, "savings table has no rows");
    } else {
        run.manifest().set("balance", csv::format_double(a.balance));
        run.manifest().set("payment", csv::format_double(a.payment));
        run.manifest().set("apr", csv::format_double(a.apr));
        run.manifest().set("new_apr", csv::format_double(a.new_apr));
        SavingsRow r;
        r.age = a.age;
        r.balance = a.balance;
        r.payment = a.payment;
        r.apr_pct = a.apr;
        r.new_apr_pct = a.new_apr;
        inputs.push_back(std::move(r));
    }

    for (auto& r : inputs) {
        auto c = conv;
        c.loan_age = r.age;
        r.estimate = refinance_savings_apr(r.balance, r.payment, r.apr_pct / 100.0, r.new_apr_pct / 100.0, c);
    }

    if (g.json()) {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& r : inputs) {
            doc.push_back({{"band", r.band},
                           {"age", r.age ? nlohmann::json(*r.age) : nlohmann::json(nullptr)},
                           {"balance", r.balance},
                           {"payment", r.payment},
                           {"apr", r.apr_pct},
                           {"payments", r.estimate.remaining_payments},
                           {"new_apr", r.new_apr_pct},
                           {"new_payment", r.estimate.new_payment},
                           {"monthly_saving", r.estimate.monthly_saving},
                           {"total_saving", r.estimate.total_saving}});
        }
        run.output("savings.json", doc.dump(2) + "\n");
    } else {
        run.output("savings.csv", render([&](std::ostream& o) { write_savings_csv(o, inputs); }));
    }
    run.finish();
}

// --- recovery ---------------------------------------------------------------

struct RecoveryArgs {
    std::string loans, payments, points;
    double span = 0.75;
};

void cmd_recovery(const Globals& g, const RecoveryArgs& a) {
    Run run(g, "recovery");
    run.manifest().seed = g.seed;
    run.manifest().set("span", csv::format_double(a.span));

    std::vector<std::pair<int, double>> defaulted;
    if (!a.points.empty()) {
        run.manifest().add_input(a.points);
        const auto t = csv::read_file(a.points);
        t.require_columns({"age", "recovery"});
        for (const auto& row : t.rows()) {
            defaulted.emplace_back(static_cast<int>(csv::parse_int(row[t.column("age")], "age")),
                                   csv::parse_double(row[t.column("recovery")], "recovery"));
        }
    } else {
        require(!a.loans.empty() && !a.payments.empty(), "give --points or both --loans and --payments");
        run.manifest().add_input(a.loans);
        run.manifest().add_input(a.payments);
        for (const auto& rec : filter_loans(read_loan_files(a.loans, a.payments))) {
            const auto outcome = determine_outcome(rec.history);
            if (outcome.kind != OutcomeKind::Defaulted) continue;
            const auto obs = to_observation(rec, outcome);
            defaulted.emplace_back(obs.exit_age, static_cast<double>(rec.recovered_amount.cents()) /
                                                     static_cast<double>(rec.original_amount.cents()));
        }
    }
    if (defaulted.empty()) fail(Errc::EmptyResult, "no defaulted loans");

    const auto points = recovery_points(defaulted);
    for (const int age : points.flagged()) std::cerr << "warning: mean recovery above one at age " << age << "\n";
    const Eigen::VectorXd smoothed = smooth(points, a.span);
    GammaFitOptions opts;
    opts.seed = g.seed;
    const auto fit = fit_gamma_kernel(points.ages.cast<double>(), smoothed.cwiseMax(0.0), opts);

    run.output("recovery_fit.json", fit_to_json(fit) + "\n");
    run.output("recovery.csv", render([&](std::ostream& o) { write_recovery_csv(o, points, smoothed, fit); }));
    run.finish();
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string preset = "table-b1";
    long n = 10000;
    int replicates = 1000;
    int tau = 5;
    int threads = 0;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a) {
    if (a.preset != "table-b1") fail(Errc::UnknownKey, "unknown preset '" + a.preset + "'");
    Run run(g, "simulate");
    run.manifest().seed = g.seed;
    run.manifest().set("preset", a.preset);
    run.manifest().set("n", std::to_string(a.n));
    run.manifest().set("r", std::to_string(a.replicates));
    run.manifest().set("tau", std::to_string(a.tau));

    auto config = table_b1_config();
    config.n = a.n;
    config.replicates = a.replicates;
    config.trunc.censor_offset = a.tau;
    config.seed = g.seed;
    config.theta = g.theta;
    config.threads = a.threads;
    const auto report = run_study(config);

    run.output("study.json", report_to_json(report) + "\n");
    run.output("study.csv", render([&](std::ostream& o) { write_report_csv(o, report); }));
    run.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-time competing-risks hazards for amortizing loans"};
    app.set_version_flag("--version", std::string(LOANHAZARD_VERSION));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_option("--theta", g.theta, "CI significance level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app.add_option("--output-dir", g.output_dir, "Directory for outputs")->capture_default_str();
    app.add_option("--format", g.format, "Output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));

    IngestArgs ingest;
    auto* sc = app.add_subcommand("ingest", "Filter loans and emit band-tagged observations");
    sc->add_option("--loans", ingest.loans, "Static loan table")->required()->check(CLI::ExistingFile);
    sc->add_option("--payments", ingest.payments, "Monthly payment table")->required()->check(CLI::ExistingFile);
    sc->add_flag("--no-filter", ingest.no_filter, "Keep every loan with a readable outcome");
    sc->add_option("--pad-cents", ingest.pad_cents, "Repayment tolerance in cents")->capture_default_str();
    sc->callback([&] { cmd_ingest(g, ingest); });

    EstimateArgs est;
    sc = app.add_subcommand("estimate", "Cause-specific hazard curve for one band");
    sc->add_option("--observations", est.observations)->required()->check(CLI::ExistingFile);
    sc->add_option("--band", est.band)->required();
    sc->add_option("--cause", est.cause)->capture_default_str();
    sc->add_option("--window", est.window, "Ages LO:HI")->capture_default_str();
    sc->add_flag("--interpolate", est.interpolate, "Fill zero-event ages with the preceding hazard");
    sc->callback([&] { cmd_estimate(g, est); });

    ConvergeArgs conv;
    sc = app.add_subcommand("converge", "Transition matrix of credit-risk convergence months");
    sc->add_option("--curves", conv.curves, "Curve CSVs, one per band");
    sc->add_option("--observations", conv.observations);
    sc->add_option("--bands", conv.bands)->delimiter(',');
    sc->add_option("--window", conv.window)->capture_default_str();
    sc->add_option("--min-age", conv.min_age)->capture_default_str();
    sc->add_option("--run", conv.run_length)->capture_default_str();
    sc->callback([&] { cmd_converge(g, conv); });

    ReturnsArgs ret;
    sc = app.add_subcommand("returns", "One-month and lifetime risk-adjusted returns by loan age");
    sc->add_option("--loan", ret.loan)->capture_default_str();
    sc->add_option("--apr", ret.apr, "APR in percent")->required();
    sc->add_option("--term", ret.term)->capture_default_str();
    sc->add_option("--default-curve", ret.default_curve)->check(CLI::ExistingFile);
    sc->add_option("--prepay-curve", ret.prepay_curve)->check(CLI::ExistingFile);
    sc->add_option("--recovery-fit", ret.recovery_fit)->check(CLI::ExistingFile);
    sc->add_option("--recovery", ret.recovery, "Constant recovery fraction")->capture_default_str();
    sc->add_option("--band", ret.band)->capture_default_str();
    sc->callback([&] { cmd_returns(g, ret); });

    SavingsArgs sav;
    sc = app.add_subcommand("savings", "Monthly and total savings from refinancing");
    sc->add_option("--table", sav.table, "CSV with balance,payment,apr,new_apr")->check(CLI::ExistingFile);
    sc->add_option("--balance", sav.balance);
    sc->add_option("--payment", sav.payment);
    sc->add_option("--apr", sav.apr, "Current APR in percent");
    sc->add_option("--new-apr", sav.new_apr, "Refinance APR in percent");
    sc->add_option("--age", sav.age, "Loan age in months");
    sc->add_option("--term", sav.term)->capture_default_str();
    sc->add_option("--payoff-rate", sav.payoff_rate)
        ->capture_default_str()
        ->check(CLI::IsMember({"effective", "nominal"}));
    sc->add_option("--total", sav.total)->capture_default_str()->check(CLI::IsMember({"payoff", "remaining"}));
    sc->callback([&] { cmd_savings(g, sav); });

    RecoveryArgs rec;
    sc = app.add_subcommand("recovery", "Smoothed and gamma-fitted recovery curve");
    sc->add_option("--loans", rec.loans)->check(CLI::ExistingFile);
    sc->add_option("--payments", rec.payments)->check(CLI::ExistingFile);
    sc->add_option("--points", rec.points, "CSV with age,recovery per defaulted loan")->check(CLI::ExistingFile);
    sc->add_option("--span", rec.span)->capture_default_str();
    sc->callback([&] { cmd_recovery(g, rec); });

    SimulateArgs sim;
    sc = app.add_subcommand("simulate", "Simulation study of the estimator");
    sc->add_option("--preset", sim.preset)->capture_default_str();
    sc->add_option("--n", sim.n)->capture_default_str();
    sc->add_option("--r", sim.replicates)->capture_default_str();
    sc->add_option("--tau", sim.tau)->capture_default_str();
    sc->add_option("--threads", sim.threads)->capture_default_str();
    sc->callback([&] { cmd_simulate(g, sim); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code(Errc::Schema);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
