#include "loanhazard/types.hpp"

#include <algorithm>
#include <cctype>

#include "loanhazard/error.hpp"

namespace loanhazard {

namespace {

std::string normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        if (ch == '-' || ch == ' ') ch = '_';
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
}

}  // namespace

std::string_view to_string(Cause c) { return c == Cause::Default ? "default" : "prepay"; }

Cause parse_cause(std::string_view text) {
    const auto key = normalize(text);
    if (key == "default" || key == "1" || key == "01") return Cause::Default;
    if (key == "prepay" || key == "prepayment" || key == "2" || key == "02") return Cause::Prepay;
    fail(Errc::UnknownKey, "unknown cause '" + std::string(text) + "'");
}

std::string_view to_string(RiskBand b) {
    switch (b) {
        case RiskBand::SuperPrime: return "super_prime";
        case RiskBand::Prime: return "prime";
        case RiskBand::NearPrime: return "near_prime";
        case RiskBand::Subprime: return "subprime";
        case RiskBand::DeepSubprime: return "deep_subprime";
    }
    return "?";
}

RiskBand parse_risk_band(std::string_view text) {
    const auto key = normalize(text);
    for (RiskBand b : kRiskBands) {
        if (key == to_string(b)) return b;
    }
    if (key == "superprime") return RiskBand::SuperPrime;
    if (key == "nearprime") return RiskBand::NearPrime;
    if (key == "deepsubprime") return RiskBand::DeepSubprime;
    fail(Errc::UnknownKey, "unknown risk band '" + std::string(text) + "'");
}

void validate(const ObservedLoan& obs) {
    require(obs.entry_age >= 0, "entry age must be non-negative");
    require(obs.entry_age <= obs.exit_age, "entry age exceeds exit age");
    require(obs.observed_event == obs.cause.has_value(), "cause must be present iff an event is observed");
}

}  // namespace loanhazard
