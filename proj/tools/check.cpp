#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "app.hpp"
#include "syncnav/errors.hpp"

namespace syncnav::app {

namespace {

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

struct Sampler {
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  Vec3 vec3(double s) { return {s * normal(rng), s * normal(rng), s * normal(rng)}; }
  Mat32 mat32(double s) {
    Mat32 m;
    for (int i = 0; i < 6; ++i) m(i) = s * normal(rng);
    return m;
  }
  Rot3 rotation() {
    Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
    return Rot3::unchecked(q.normalized().toRotationMatrix());
  }
  Mat2 scaling() {
    Mat2 a;
    a << uniform(0.5, 2.0), uniform(-0.5, 0.5), uniform(-0.5, 0.5), uniform(0.5, 2.0);
    return a;
  }
  ObserverState state() { return {{rotation(), mat32(1.0)}, {rotation(), mat32(1.0), scaling()}}; }
};

MeasurementBundle exact_measurements(const SE23& x, const WorldConstants& w) {
  MeasurementBundle m;
  m.pos = measure_position(x);
  m.vel = measure_velocity(x);
  m.mag = measure_magnetometer(x, w);
  return m;
}

CheckResult check_conjugation(Sampler& s) {
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const SIM23 z{s.rotation(), s.mat32(3.0), s.scaling()};
    const SE23 x{s.rotation(), s.mat32(3.0)};
    const Mat5 dense = z.matrix() * x.matrix() * inverse(z).matrix();
    worst = std::max(worst, (dense - conjugate(z, x).matrix()).cwiseAbs().maxCoeff());
  }
  return {"conjugation-closure", worst < 1e-10, fmt("max block deviation %.3g (limit %.0e)", worst, 1e-10)};
}

CheckResult check_rate_oracle(Sampler& s, const RunConfig& cfg) {
  const WorldConstants w;
  const Gains g = preset_gains("pvm");
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const ObserverState st = s.state();
    const SE23 x{s.rotation(), s.mat32(1.0)};
    const CorrectionPair c = compute_corrections(st, exact_measurements(x, w), g, w, cfg.fault);
    const SE23 e = error_state(x, st);
    const double analytic = lyapunov_rate(e, c);
    const double fd = fd_rate_richardson([&](double t) { return lyapunov(error_flow(e, c, t)); }, 1e-3);
    worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(analytic)));
  }
  return {"lyapunov-rate-oracle", worst < 1e-7, fmt("max relative mismatch %.3g (limit %.0e)", worst, 1e-7)};
}

CheckResult check_monotonicity(Sampler& s, const RunConfig& cfg) {
  const WorldConstants w;
  std::ostringstream detail;
  double worst_rate = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 50; ++i) {
    const ObserverState st = s.state();
    const SE23 x{s.rotation(), s.mat32(1.0)};
    const CorrectionPair c = compute_corrections(st, exact_measurements(x, w), preset_gains("pvm"), w, cfg.fault);
    worst_rate = std::max(worst_rate, lyapunov_rate(error_state(x, st), c));
  }
  bool ok = worst_rate <= 1e-9;
  detail << fmt("max random-state rate %.3g", worst_rate);
  for (const char* preset : {"p", "pv", "pm", "pvm"}) {
    SimulationConfig sc;
    sc.gains = preset_gains(preset);
    sc.duration = 10.0;
    sc.fault = cfg.fault;
    detail << "; " << preset;
    try {
      const SimulationResult r = simulate_circle(sc);
      ok = ok && r.summary.lyapunov_nonincreasing;
      detail << fmt(" max increase %.3g", r.summary.max_lyapunov_increase);
    } catch (const SingularAuxiliaryError&) {
      ok = false;
      detail << " diverged";
    }
  }
  return {"lyapunov-monotonicity", ok, detail.str()};
}

CheckResult check_synchrony(Sampler& s) {
  const WorldConstants w;
  const double dt = 1e-3;
  SE23 x{s.rotation(), s.mat32(5.0)};
  ObserverState st = s.state();
  const SE23 e0 = error_state(x, st);
  const Vec3 w0 = s.vec3(0.5), w1 = s.vec3(0.5), a0 = s.vec3(3.0), a1 = s.vec3(3.0);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double t = (k + 0.5) * dt;
    const ImuInput u{w0 * std::cos(t) + w1 * std::sin(2.0 * t), a0 * std::sin(t) + a1 * std::cos(3.0 * t)};
    x = propagate_truth(x, u, w, dt);
    st = propagate_observer(st, u, w, dt);
    worst = std::max(worst, (error_state(x, st).matrix() - e0.matrix()).cwiseAbs().maxCoeff());
  }
  return {"error-synchrony", worst < 1e-9, fmt("max error drift %.3g over 2 s (limit %.0e)", worst, 1e-9)};
}

CheckResult check_riccati(const RunConfig& cfg) {
  SimulationConfig sc;
  sc.duration = 10.0;
  sc.fault = cfg.fault;
  const SimulationResult r = simulate_circle(sc);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, resid = 0.0;
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const ObserverState& st = r.rows[k].state;
    const Mat2& a = st.auxiliary.ablock;
    const Eigen::SelfAdjointEigenSolver<Mat2> eig(Mat2(a * a.transpose()));
    lo = std::min(lo, eig.eigenvalues()(0));
    hi = std::max(hi, eig.eigenvalues()(1));
    const CorrectionPair c =
        compute_corrections(st, r.events[k].measurements, sc.gains, sc.world, cfg.fault);
    resid = std::max(resid, riccati_flow_residual(st, c, sc.gains, sc.world, 1e-4));
  }
  const bool ok = lo > 1e-3 && hi < 1e3 && resid < 1e-4;
  return {"riccati-bounds", ok,
          fmt("eig(P) in [%.3g, %.3g]", lo, hi) + fmt("; max residual %.3g (limit %.0e)", resid, 1e-4)};
}

CheckResult check_log_round_trip(const RunConfig& cfg) {
  SimulationConfig sc;
  sc.duration = 1.0;
  sc.seed = cfg.seed;
  sc.noise = {0.5, 0.01};
  const LogBundle log = export_log(simulate_circle(sc), {47.0, 8.0, 400.0, 0.0});
  std::ostringstream first, second;
  write_log(first, log);
  std::istringstream in(first.str());
  write_log(second, parse_log(in));
  const bool ok = first.str() == second.str();
  return {"log-round-trip", ok, ok ? "bit-identical" : "rewritten log differs"};
}

CheckResult check_replay(const RunConfig& cfg) {
  SimulationConfig sc;
  sc.duration = 2.0;
  sc.fault = cfg.fault;
  const SimulationResult sim = simulate_circle(sc);
  ReplayConfig rc;
  rc.gains = sc.gains;
  rc.initial = sc.initial;
  rc.origin = LlaFix{};
  rc.world = sc.world;
  rc.fault = cfg.fault;
  std::ostringstream text;
  write_log(text, export_log(sim));
  std::istringstream in(text.str());
  const ReplayResult rep = replay(parse_log(in), rc);
  double worst = rep.rows.size() == sim.rows.size() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < std::min(rep.rows.size(), sim.rows.size()); ++k) {
    worst = std::max(worst, (rep.rows[k].state.estimate.matrix() - sim.rows[k].state.estimate.matrix())
                                .cwiseAbs()
                                .maxCoeff());
  }
  return {"replay-consistency", worst < 1e-9, fmt("max estimate deviation %.3g (limit %.0e)", worst, 1e-9)};
}

}  // namespace

std::vector<CheckResult> run_check(const RunConfig& cfg) {
  Sampler s{std::mt19937_64(cfg.seed)};
  std::vector<CheckResult> out;
  // A diverging run throws; that counts as a failure of the check, not a crash.
  auto run = [&out](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("aborted: ") + e.what()});
    }
  };
  run("conjugation-closure", [&] { return check_conjugation(s); });
  run("lyapunov-rate-oracle", [&] { return check_rate_oracle(s, cfg); });
  run("lyapunov-monotonicity", [&] { return check_monotonicity(s, cfg); });
  run("error-synchrony", [&] { return check_synchrony(s); });
  run("riccati-bounds", [&] { return check_riccati(cfg); });
  run("log-round-trip", [&] { return check_log_round_trip(cfg); });
  run("replay-consistency", [&] { return check_replay(cfg); });
  return out;
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  std::size_t passed = 0;
  for (const CheckResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    passed += r.passed ? 1 : 0;
  }
  out << passed << "/" << results.size() << " checks passed\n";
  return out.str();
}

}  // namespace syncnav::app
