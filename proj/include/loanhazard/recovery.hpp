#pragma once

// Recovery-upon-default curve: raw per-age averages, local linear smoothing,
// and a gamma-kernel least-squares fit used for extrapolation.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loanhazard/error.hpp"

namespace loanhazard {

/// Mean recovered fraction per default age (ages with no defaults absent).
struct RecoveryPoints {
    Eigen::VectorXi ages;
    Eigen::VectorXd values;
    Eigen::VectorXi counts;

    Eigen::Index size() const { return ages.size(); }
    /// Ages whose mean exceeds full recovery (possible in messy servicer data).
    std::vector<int> flagged() const;
};

RecoveryPoints recovery_points(std::span<const std::pair<int, double>> defaulted);

/// Locally weighted linear regression with tricube weights evaluated on the
/// observed grid. `span` is the fraction of points in each neighbourhood.
Eigen::VectorXd smooth(const Eigen::VectorXd& ages, const Eigen::VectorXd& values, double span = 0.75);
Eigen::VectorXd smooth(const RecoveryPoints& points, double span = 0.75);

/// R(x) = c x^(k-1) exp(-x / theta).
struct GammaKernelFit {
    double scale = 0.0;  // c
    double shape = 0.0;  // k
    double theta = 0.0;
    double residual = 0.0;  // sum of squared errors at the optimum
    int evaluations = 0;

    double operator()(double x) const;
    /// Location of the interior maximum (k - 1) theta; zero when k <= 1.
    double peak_age() const;
};

struct GammaFitOptions {
    int restarts = 10;
    int max_evaluations = 10000;  // shared across restarts
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    double tolerance = 1e-14;
};

/// Error carrying the best parameters found before the budget ran out.
class GammaFitError : public Error {
  public:
    GammaFitError(const std::string& what, GammaKernelFit best) : Error(Errc::Numerical, what), best_(best) {}
    const GammaKernelFit& best() const { return best_; }

  private:
    GammaKernelFit best_;
};

/// Least-squares gamma kernel through (ages, values) by a multi-start
/// Nelder-Mead simplex on (ln c, ln k, ln theta).
GammaKernelFit fit_gamma_kernel(const Eigen::VectorXd& ages, const Eigen::VectorXd& values,
                                const GammaFitOptions& opts = {});

/// Fitted recovery fraction at age x, clamped to [0, 1].
double recovery_at(const GammaKernelFit& fit, double x);

// --- export -----------------------------------------------------------------

void write_recovery_csv(std::ostream& out, const RecoveryPoints& points, const Eigen::VectorXd& smoothed,
                        const GammaKernelFit& fit);
std::string fit_to_json(const GammaKernelFit& fit);
GammaKernelFit fit_from_json(const std::string& text);

}  // namespace loanhazard
