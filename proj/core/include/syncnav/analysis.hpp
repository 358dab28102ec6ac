#pragma once

// Error metrics, persistence-of-excitation windows, the Riccati residual for
// P = A_Z A_Z^T and finite-difference helpers.

#include <functional>
#include <vector>

#include "syncnav/lie.hpp"
#include "syncnav/model.hpp"
#include "syncnav/observer.hpp"

namespace syncnav {

struct ErrorMetrics {
  double attitude_angle = 0.0;  // rad
  double velocity_error = 0.0;  // m/s
  double position_error = 0.0;  // m
  double lyapunov = 0.0;
  double stamp = 0.0;
};

/// Geodesic angle between two attitudes, in [0, pi].
double attitude_angle(const Rot3& r, const Rot3& rhat);

ErrorMetrics error_metrics(const SE23& truth, const ObserverState& state, double stamp);

struct PEWitness {
  double window_start = 0.0;
  double window_end = 0.0;
  double gram_min_eig = 0.0;
  double delta = 0.0;
  double T = 0.0;

  bool passed() const { return gram_min_eig > delta; }
  double margin() const { return gram_min_eig - delta; }
};

inline constexpr double kDefaultPEWindow = 10.0;

/// -sum_i mu_i^x mu_i^x.
Mat3 pe_integrand(const std::vector<Vec3>& mus);

/// Sliding windows of length T over uniformly sampled direction sets, one
/// witness per start sample. The window integral of pe_integrand uses the
/// trapezoidal rule. Throws std::invalid_argument when the series is shorter
/// than T, the sampling is not uniform, or T <= 0.
std::vector<PEWitness> pe_check(const std::vector<double>& stamps,
                                const std::vector<std::vector<Vec3>>& mu_series, double T,
                                double delta);

/// Excitation directions for the position, velocity and magnetometer terms.
/// Absent measurements are skipped.
std::vector<Vec3> pe_directions(const ObserverState& state, const MeasurementBundle& m,
                                const Gains& gains, const WorldConstants& w);

/// S_D P + P S_D^T + diag(k_v, k_p) - P K_q P.
Mat2 riccati_rhs(const Mat2& p, double k_p, double k_v, const Mat2& K_q);

/// Frobenius norm of Pdot - riccati_rhs(P).
double riccati_residual(const Mat2& p, double k_p, double k_v, const Mat2& K_q, const Mat2& pdot);

/// Riccati residual of P = A_Z A_Z^T at s, with Pdot taken as a
/// Richardson central difference (step h) of the auxiliary flow under the
/// frozen corrections c.
double riccati_flow_residual(const ObserverState& s, const CorrectionPair& c, const Gains& g,
                             const WorldConstants& w, double h);

/// Central difference (f(h) - f(-h)) / 2h of a scalar evaluated along a flow
/// parameterized by signed time.
double fd_rate(const std::function<double(double)>& f_of_flow, double h);

/// One Richardson step on fd_rate: (4 D(h/2) - D(h)) / 3.
double fd_rate_richardson(const std::function<double(double)>& f_of_flow, double h);

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit of log(y) against t over the leading run of samples
/// with y > floor.
LogLinearFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y,
                            double floor);

struct RunSummary {
  ErrorMetrics terminal;
  double max_lyapunov_increase = 0.0;
  bool lyapunov_nonincreasing = true;
  LogLinearFit vbar_decay;
  double pe_pass_fraction = 0.0;  // NaN when no window fits
  double min_pe_margin = 0.0;
  std::size_t steps = 0;
};

/// Per-step series recorded by a run, consumed by summarize().
struct RunSeries {
  std::vector<ErrorMetrics> metrics;
  std::vector<double> vbar_norm;
  std::vector<PEWitness> pe;
};

/// Terminal metrics, the largest single-step Lyapunov increase, the decay fit
/// of |V_Ebar| before it first reaches 1e-9 and the fraction of passing PE windows.
RunSummary summarize(const RunSeries& series, double lyapunov_slack = 1e-9);

}  // namespace syncnav
