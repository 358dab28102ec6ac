#include "syncnav/simulation.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "syncnav/errors.hpp"

namespace syncnav {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// PE margins are attached to the row closing each window.
void attach_pe(std::vector<TraceRow>& rows, const std::vector<std::vector<Vec3>>& mus,
               double window, RunSeries& series) {
  if (rows.size() < 2 || !(window > 0.0) || rows.back().t - rows.front().t <= window) return;
  std::vector<double> stamps;
  stamps.reserve(rows.size());
  for (const TraceRow& r : rows) stamps.push_back(r.t);
  try {
    series.pe = pe_check(stamps, mus, window, 0.1 * window);
  } catch (const std::invalid_argument&) {
    return;
  }
  const std::size_t offset = rows.size() - series.pe.size();
  for (std::size_t i = 0; i < series.pe.size(); ++i) rows[i + offset].pe_margin = series.pe[i].margin();
}

Vec3 perturb(const Vec3& v, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return v;
  std::normal_distribution<double> n(0.0, sigma);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return v + Vec3(x, y, z);
}

}  // namespace

SimulationResult simulate_circle(const SimulationConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(cfg.duration > 0.0)) throw std::invalid_argument("duration must be positive");
  cfg.gains.validate();

  const auto steps = static_cast<std::size_t>(std::max<long long>(1, std::llround(cfg.duration / cfg.dt)));
  std::mt19937_64 rng(cfg.seed);

  SimulationResult out;
  out.rows.reserve(steps + 1);
  out.events.reserve(steps + 1);
  RunSeries series;
  std::vector<std::vector<Vec3>> mus;
  mus.reserve(steps + 1);

  SE23 truth = nav_to_group(circle_reference(0.0, cfg.world).state);
  ObserverState state = cfg.initial;

  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;

    MeasurementBundle m;
    m.stamp = t;
    m.pos = perturb(measure_position(truth), cfg.noise.gnss_sigma, rng);
    m.vel = perturb(measure_velocity(truth), cfg.noise.gnss_sigma, rng);
    m.mag = perturb(measure_magnetometer(truth, cfg.world), cfg.noise.mag_sigma, rng).normalized();

    TraceRow row;
    row.t = t;
    row.truth = truth;
    row.state = state;
    row.metrics = error_metrics(truth, state, t);
    row.vbar_norm = error_state(truth, state).vblock.norm();
    row.pe_margin = kNaN;
    out.rows.push_back(row);
    series.metrics.push_back(*row.metrics);
    series.vbar_norm.push_back(row.vbar_norm);
    mus.push_back(pe_directions(state, m, cfg.gains, cfg.world));
    out.conditioning_alarm = out.conditioning_alarm || state.conditioning_alarm();

    // Inputs are sampled at the middle of the step.
    const ImuInput u = circle_reference(t + 0.5 * cfg.dt, cfg.world).input;
    out.events.push_back({t, u, m});
    if (k == steps) break;

    const double dt = static_cast<double>(k + 1) * cfg.dt - t;
    state = observer_update(state, u, m, cfg.gains, cfg.world, dt, cfg.fault);
    truth = propagate_truth(truth, u, cfg.world, dt);
  }

  attach_pe(out.rows, mus, cfg.pe_window, series);
  out.summary = summarize(series);
  return out;
}

LogBundle export_log(const SimulationResult& result, const LlaFix& origin) {
  LogBundle log;
  for (const FusedEvent& ev : result.events) {
    log.imu.push_back({ev.stamp, ev.imu});
    const MeasurementBundle& m = ev.measurements;
    if (m.pos) {
      GnssRecord r;
      r.stamp = ev.stamp;
      r.fix = ned_to_lla(origin, *m.pos);
      r.fix.stamp = ev.stamp;
      r.velocity_ned = m.vel;
      log.gnss.push_back(r);
    }
    if (m.mag) log.mag.push_back({ev.stamp, *m.mag});
  }
  return log;
}

ReplayResult replay(const LogBundle& log, const ReplayConfig& cfg) {
  cfg.gains.validate();
  if (log.imu.empty()) throw DataError("no imu samples");

  ReplayResult out;
  if (cfg.origin) {
    out.origin = *cfg.origin;
  } else if (!log.gnss.empty()) {
    out.origin = log.gnss.front().fix;
  }
  const std::vector<FusedEvent> events =
      zoh_fuse(log.imu, gnss_to_local(log.gnss, out.origin), log.mag);

  RunSeries series;
  std::vector<std::vector<Vec3>> mus;
  ObserverState state = cfg.initial;
  std::size_t blind = 0;

  for (std::size_t k = 0; k < events.size(); ++k) {
    const FusedEvent& ev = events[k];
    const bool fixed = ev.measurements.pos.has_value();
    const MeasurementBundle m = fixed ? ev.measurements : MeasurementBundle{};

    TraceRow row;
    row.t = ev.stamp;
    row.state = state;
    row.pe_margin = kNaN;
    row.vbar_norm = kNaN;
    out.rows.push_back(row);
    ErrorMetrics em;
    em.stamp = ev.stamp;
    em.lyapunov = kNaN;
    em.attitude_angle = em.velocity_error = em.position_error = kNaN;
    series.metrics.push_back(em);
    mus.push_back(pe_directions(state, m, cfg.gains, cfg.world));
    out.conditioning_alarm = out.conditioning_alarm || state.conditioning_alarm();

    if (k + 1 == events.size()) break;
    if (!fixed) ++blind;
    const double dt = events[k + 1].stamp - ev.stamp;
    state = fixed ? observer_update(state, ev.imu, m, cfg.gains, cfg.world, dt, cfg.fault)
                  : propagate_observer(state, ev.imu, cfg.world, dt);
  }

  const std::size_t stepped = events.size() > 1 ? events.size() - 1 : 0;
  out.unobservable_fraction =
      stepped > 0 ? static_cast<double>(blind) / static_cast<double>(stepped) : (log.gnss.empty() ? 1.0 : 0.0);
  attach_pe(out.rows, mus, cfg.pe_window, series);
  out.summary = summarize(series);
  return out;
}

}  // namespace syncnav
