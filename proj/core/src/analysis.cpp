#include "syncnav/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace syncnav {

double attitude_angle(const Rot3& r, const Rot3& rhat) {
  const double c = ((r.matrix() * rhat.matrix().transpose()).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

ErrorMetrics error_metrics(const SE23& truth, const ObserverState& state, double stamp) {
  ErrorMetrics m;
  m.attitude_angle = attitude_angle(truth.rotation, state.estimate.rotation);
  m.velocity_error = (truth.velocity() - state.estimate.velocity()).norm();
  m.position_error = (truth.position() - state.estimate.position()).norm();
  m.lyapunov = lyapunov(error_state(truth, state));
  m.stamp = stamp;
  return m;
}

Mat3 pe_integrand(const std::vector<Vec3>& mus) {
  Mat3 g = Mat3::Zero();
  for (const Vec3& mu : mus) {
    g += mu.squaredNorm() * Mat3::Identity() - mu * mu.transpose();
  }
  return g;
}

std::vector<PEWitness> pe_check(const std::vector<double>& stamps,
                                const std::vector<std::vector<Vec3>>& mu_series, double T,
                                double delta) {
  if (!(T > 0.0)) throw std::invalid_argument("pe_check: window must be positive");
  if (stamps.size() != mu_series.size()) throw std::invalid_argument("pe_check: size mismatch");
  if (stamps.size() < 2) throw std::invalid_argument("pe_check: window longer than series");
  const double h = stamps[1] - stamps[0];
  for (std::size_t i = 1; i < stamps.size(); ++i) {
    if (std::abs((stamps[i] - stamps[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)) + 1e-12) {
      throw std::invalid_argument("pe_check: sampling is not uniform");
    }
  }
  const auto n = static_cast<std::size_t>(std::llround(T / h));
  if (n == 0 || n >= stamps.size()) throw std::invalid_argument("pe_check: window longer than series");

  // Cumulative trapezoid so each window is a difference of two partial sums.
  std::vector<Mat3> cum(stamps.size(), Mat3::Zero());
  Mat3 prev = pe_integrand(mu_series[0]);
  for (std::size_t i = 1; i < stamps.size(); ++i) {
    const Mat3 cur = pe_integrand(mu_series[i]);
    cum[i] = cum[i - 1] + 0.5 * h * (prev + cur);
    prev = cur;
  }

  std::vector<PEWitness> out;
  out.reserve(stamps.size() - n);
  for (std::size_t i = 0; i + n < stamps.size(); ++i) {
    const Mat3 gram = cum[i + n] - cum[i];
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (gram + gram.transpose()), Eigen::EigenvaluesOnly);
    out.push_back({stamps[i], stamps[i + n], es.eigenvalues().minCoeff(), delta, T});
  }
  return out;
}

std::vector<Vec3> pe_directions(const ObserverState& state, const MeasurementBundle& m,
                                const Gains& gains, const WorldConstants& w) {
  const SIM23& z = state.auxiliary;
  const Mat3 rzt = z.rotation.matrix().transpose();
  const Mat2 ainv = z.ablock.inverse();
  std::vector<Vec3> mus;
  if (m.pos) mus.push_back(std::sqrt(gains.k_c) * rzt * (*m.pos - z.vblock * ainv * kSelectPosition));
  if (m.vel) mus.push_back(std::sqrt(gains.k_d) * rzt * (*m.vel - z.vblock * ainv * kSelectVelocity));
  if (m.mag) mus.push_back(std::sqrt(gains.k_m) * rzt * w.mag_reference.normalized());
  return mus;
}

Mat2 riccati_rhs(const Mat2& p, double k_p, double k_v, const Mat2& K_q) {
  const Mat2 sd = coupling_block();
  return sd * p + p * sd.transpose() + Vec2(k_v, k_p).asDiagonal().toDenseMatrix() - p * K_q * p;
}

double riccati_residual(const Mat2& p, double k_p, double k_v, const Mat2& K_q, const Mat2& pdot) {
  return (pdot - riccati_rhs(p, k_p, k_v, K_q)).norm();
}

double riccati_flow_residual(const ObserverState& s, const CorrectionPair& c, const Gains& g,
                             const WorldConstants& w, double h) {
  auto p_at = [&](double t) {
    const Mat2 a = observer_step(s, ImuInput{}, c, w, t).auxiliary.ablock;
    return Mat2(a * a.transpose());
  };
  const Mat2 d1 = (p_at(h) - p_at(-h)) / (2.0 * h);
  const Mat2 d2 = (p_at(0.5 * h) - p_at(-0.5 * h)) / h;
  const Mat2& a = s.auxiliary.ablock;
  return riccati_residual(a * a.transpose(), g.k_p, g.k_v, g.K_q, (4.0 * d2 - d1) / 3.0);
}

double fd_rate(const std::function<double(double)>& f_of_flow, double h) {
  return (f_of_flow(h) - f_of_flow(-h)) / (2.0 * h);
}

double fd_rate_richardson(const std::function<double(double)>& f_of_flow, double h) {
  return (4.0 * fd_rate(f_of_flow, 0.5 * h) - fd_rate(f_of_flow, h)) / 3.0;
}

LogLinearFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y,
                            double floor) {
  LogLinearFit fit;
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
    if (!(y[i] > floor)) break;
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
    syy += ly * ly;
    ++fit.samples;
  }
  if (fit.samples < 2) return fit;
  const double n = static_cast<double>(fit.samples);
  const double vt = stt - st * st / n;
  const double vy = syy - sy * sy / n;
  const double cty = sty - st * sy / n;
  if (vt <= 0.0) return fit;
  fit.slope = cty / vt;
  fit.intercept = (sy - fit.slope * st) / n;
  fit.r_squared = vy > 0.0 ? (cty * cty) / (vt * vy) : 1.0;
  return fit;
}

RunSummary summarize(const RunSeries& series, double lyapunov_slack) {
  RunSummary s;
  if (series.metrics.empty()) return s;
  s.terminal = series.metrics.back();
  s.steps = series.metrics.size() - 1;
  for (std::size_t i = 1; i < series.metrics.size(); ++i) {
    const double inc = series.metrics[i].lyapunov - series.metrics[i - 1].lyapunov;
    s.max_lyapunov_increase = std::max(s.max_lyapunov_increase, inc);
  }
  s.lyapunov_nonincreasing = s.max_lyapunov_increase <= lyapunov_slack;

  std::vector<double> t;
  t.reserve(series.metrics.size());
  for (const ErrorMetrics& m : series.metrics) t.push_back(m.stamp);
  s.vbar_decay = fit_log_linear(t, series.vbar_norm, 1e-9);

  if (series.pe.empty()) {
    s.pe_pass_fraction = std::numeric_limits<double>::quiet_NaN();
    s.min_pe_margin = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::size_t pass = 0;
    s.min_pe_margin = std::numeric_limits<double>::infinity();
    for (const PEWitness& w : series.pe) {
      if (w.passed()) ++pass;
      s.min_pe_margin = std::min(s.min_pe_margin, w.margin());
    }
    s.pe_pass_fraction = static_cast<double>(pass) / static_cast<double>(series.pe.size());
  }
  return s;
}

}  // namespace syncnav
