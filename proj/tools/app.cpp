#include "app.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "syncnav/errors.hpp"

namespace syncnav::app {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad number for " + what + ": '" + s + "'");
  }
  return v;
}

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

void put_rotation(std::ostream& out, const Mat3& r) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      out << ',';
      put(out, r(i, j));
    }
}

void put_vec(std::ostream& out, const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    out << ',';
    put(out, v(i));
  }
}

std::filesystem::path prepare_out(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "'");
  return p;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::replay: return "replay";
    case Mode::check: return "check";
  }
  return "?";
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

Gains parse_gains(const std::string& text, Gains g) {
  if (text.empty()) return g;
  const std::vector<std::string> parts = split(text, ',');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw std::invalid_argument("gain entry without '=': '" + parts[i] + "'");
    const std::string key = parts[i].substr(0, eq);
    const std::string val = parts[i].substr(eq + 1);
    if (key == "k_p") g.k_p = to_number(val, key);
    else if (key == "k_c") g.k_c = to_number(val, key);
    else if (key == "k_v") g.k_v = to_number(val, key);
    else if (key == "k_d") g.k_d = to_number(val, key);
    else if (key == "k_m") g.k_m = to_number(val, key);
    else if (key == "kq") {
      // kq takes the next comma-separated field as its second diagonal entry.
      if (i + 1 >= parts.size()) throw std::invalid_argument("kq needs two values: kq=a,b");
      g.K_q = Vec2(to_number(val, "kq"), to_number(parts[++i], "kq")).asDiagonal();
    } else {
      throw std::invalid_argument("unknown gain '" + key + "'");
    }
  }
  return g;
}

NoiseConfig parse_noise(const std::string& text) {
  NoiseConfig n;
  if (text.empty()) return n;
  for (const std::string& part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("noise entry without '=': '" + part + "'");
    const std::string key = part.substr(0, eq);
    const double v = to_number(part.substr(eq + 1), key);
    if (v < 0.0) throw std::invalid_argument("noise sigma must be nonnegative");
    if (key == "gnss") n.gnss_sigma = v;
    else if (key == "mag") n.mag_sigma = v;
    else throw std::invalid_argument("unknown noise channel '" + key + "'");
  }
  return n;
}

Vec3 parse_triple(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 3) throw std::invalid_argument("expected three comma-separated values: '" + text + "'");
  return {to_number(parts[0], "value"), to_number(parts[1], "value"), to_number(parts[2], "value")};
}

Gains resolve_gains(const std::string& preset, const std::string& gains_text, Mode mode) {
  Gains base = mode == Mode::replay ? experiment_gains() : preset_gains("pvm");
  if (!preset.empty() && preset != "custom") base = preset_gains(preset);
  Gains g = parse_gains(gains_text, base);
  g.validate();
  return g;
}

void write_trace(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "t";
  for (const char* who : {"R", "Rhat"}) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out << ',' << who << i << j;
    const std::string suffix = std::string(who) == "R" ? "" : "hat";
    for (const char* q : {"v", "p"})
      for (const char* ax : {"x", "y", "z"}) out << ',' << q << suffix << '_' << ax;
  }
  out << ",attitude_angle,vel_err,pos_err,lyapunov,pe_margin\n";

  const double nan = std::nan("");
  for (const TraceRow& r : rows) {
    put(out, r.t);
    if (r.truth) {
      put_rotation(out, r.truth->rotation.matrix());
      put_vec(out, r.truth->velocity());
      put_vec(out, r.truth->position());
    } else {
      put_rotation(out, Mat3::Constant(nan));
      put_vec(out, Vec3::Constant(nan));
      put_vec(out, Vec3::Constant(nan));
    }
    put_rotation(out, r.state.estimate.rotation.matrix());
    put_vec(out, r.state.estimate.velocity());
    put_vec(out, r.state.estimate.position());
    const ErrorMetrics m = r.metrics.value_or(ErrorMetrics{nan, nan, nan, nan, r.t});
    for (double v : {m.attitude_angle, m.velocity_error, m.position_error, m.lyapunov, r.pe_margin}) {
      out << ',';
      put(out, v);
    }
    out << '\n';
  }
}

std::string summary_json(const RunConfig& cfg, const RunSummary& s, std::size_t rows,
                         bool conditioning_alarm, const ReplayResult* replay) {
  nlohmann::ordered_json j;
  j["mode"] = mode_name(cfg.mode);
  j["preset"] = cfg.preset.empty() ? (cfg.mode == Mode::replay ? "experiment" : "pvm") : cfg.preset;
  j["gains"] = {{"k_p", cfg.gains.k_p}, {"k_c", cfg.gains.k_c}, {"k_v", cfg.gains.k_v},
                {"k_d", cfg.gains.k_d}, {"k_m", cfg.gains.k_m},
                {"kq", {cfg.gains.K_q(0, 0), cfg.gains.K_q(1, 1)}}};
  if (cfg.mode == Mode::simulate) {
    j["dt"] = cfg.dt;
    j["duration"] = cfg.duration;
  }
  j["seed"] = cfg.seed;
  j["rows"] = rows;
  j["steps"] = s.steps;
  j["terminal"] = {{"t", number(s.terminal.stamp)},
                   {"attitude_error_rad", number(s.terminal.attitude_angle)},
                   {"velocity_error", number(s.terminal.velocity_error)},
                   {"position_error", number(s.terminal.position_error)},
                   {"lyapunov", number(s.terminal.lyapunov)}};
  j["max_lyapunov_increase"] = number(s.max_lyapunov_increase);
  j["lyapunov_nonincreasing"] = s.lyapunov_nonincreasing;
  j["vbar_decay"] = {{"rate", number(-s.vbar_decay.slope)},
                     {"r_squared", number(s.vbar_decay.r_squared)},
                     {"samples", s.vbar_decay.samples}};
  j["pe_pass_fraction"] = number(s.pe_pass_fraction);
  j["min_pe_margin"] = number(s.min_pe_margin);
  j["conditioning_alarm"] = conditioning_alarm;
  nlohmann::ordered_json flags = nlohmann::ordered_json::array();
  if (replay) {
    j["origin"] = {replay->origin.latitude, replay->origin.longitude, replay->origin.altitude};
    j["unobservable_fraction"] = replay->unobservable_fraction;
    if (replay->unobservable_fraction > 0.0) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "unobservable segment: %.0f%%", 100.0 * replay->unobservable_fraction);
      flags.push_back(buf);
    }
  }
  if (conditioning_alarm) flags.push_back("auxiliary scaling block ill-conditioned");
  j["flags"] = flags;
  return j.dump(2) + "\n";
}

SimulationResult run_simulate(const RunConfig& cfg) {
  SimulationConfig sc;
  sc.gains = cfg.gains;
  sc.dt = cfg.dt;
  sc.duration = cfg.duration;
  sc.seed = cfg.seed;
  sc.noise = cfg.noise;
  sc.fault = cfg.fault;
  sc.initial = cfg.init.value_or(InitKind::extreme) == InitKind::zero ? ObserverState::zero()
                                                                        : ObserverState::extreme();
  if (cfg.mag_reference) sc.world.mag_reference = cfg.mag_reference->normalized();
  SimulationResult result = simulate_circle(sc);

  const auto dir = prepare_out(cfg.out_path);
  std::ostringstream trace;
  write_trace(trace, result.rows);
  write_file(dir / "trace.csv", trace.str());
  write_file(dir / "summary.json",
             summary_json(cfg, result.summary, result.rows.size(), result.conditioning_alarm, nullptr));
  if (cfg.export_log_path) write_log(*cfg.export_log_path, export_log(result));
  return result;
}

ReplayResult run_replay(const RunConfig& cfg) {
  if (!cfg.log_path) throw std::invalid_argument("replay needs --log");
  const LogBundle log = parse_log(*cfg.log_path);
  ReplayConfig rc;
  rc.gains = cfg.gains;
  rc.origin = cfg.origin;
  rc.fault = cfg.fault;
  rc.initial = cfg.init.value_or(InitKind::zero) == InitKind::extreme ? ObserverState::extreme()
                                                                       : ObserverState::zero();
  rc.world.mag_reference = cfg.mag_reference ? cfg.mag_reference->normalized() : log.mag_reference;
  ReplayResult result = replay(log, rc);

  const auto dir = prepare_out(cfg.out_path);
  std::ostringstream trace;
  write_trace(trace, result.rows);
  write_file(dir / "trace.csv", trace.str());
  write_file(dir / "summary.json",
             summary_json(cfg, result.summary, result.rows.size(), result.conditioning_alarm, &result));
  return result;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synchronous INS observer: simulation, log replay and invariant checks", "syncnav"};
  app.require_subcommand(1);

  struct Raw {
    std::string preset;
    std::string gains;
    double dt = 0.02;
    double duration = 50.0;
    std::uint64_t seed = 0;
    std::string log;
    std::string out = ".";
    std::string noise;
    std::string origin;
    std::string mag_ref;
    std::string init;
    std::string export_log;
    std::string fault;
  } raw;

  auto add_common = [&raw](CLI::App* sub) {
    sub->add_option("--preset", raw.preset, "gain preset: p, pv, pm, pvm or custom")
        ->check(CLI::IsMember({"p", "pv", "pm", "pvm", "custom"}));
    sub->add_option("--gains", raw.gains, "gain overrides, e.g. k_p=10,k_c=0.1,kq=10,2");
    sub->add_option("--seed", raw.seed, "random seed");
    sub->add_option("--out", raw.out, "output directory for trace.csv and summary.json");
    sub->add_option("--mag-ref", raw.mag_ref, "reference field x,y,z (normalized)");
    sub->add_option("--init", raw.init, "initial estimate: zero or extreme")
        ->check(CLI::IsMember({"zero", "extreme"}));
    sub->add_option("--inject-fault", raw.fault, "test hook: flip-wgamma")
        ->check(CLI::IsMember({"flip-wgamma"}));
  };

  CLI::App* sim = app.add_subcommand("simulate", "circular flight from the extreme initial condition");
  add_common(sim);
  sim->add_option("--dt", raw.dt, "step in seconds");
  sim->add_option("--duration", raw.duration, "duration in seconds");
  sim->add_option("--noise", raw.noise, "Gaussian sigma per sensor, e.g. gnss=0.5,mag=0.01");
  sim->add_option("--export-log", raw.export_log, "also write the run as a CSV flight log");

  CLI::App* rep = app.add_subcommand("replay", "replay a CSV flight log");
  add_common(rep);
  rep->add_option("--log", raw.log, "CSV flight log")->required();
  rep->add_option("--origin", raw.origin, "NED origin lat,lon,alt (default: first GNSS fix)");

  CLI::App* chk = app.add_subcommand("check", "fast invariant suite");
  add_common(chk);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  RunConfig cfg;
  try {
    cfg.mode = sim->parsed() ? Mode::simulate : rep->parsed() ? Mode::replay : Mode::check;
    cfg.preset = raw.preset;
    cfg.gains = resolve_gains(raw.preset, raw.gains, cfg.mode);
    cfg.dt = raw.dt;
    cfg.duration = raw.duration;
    if (!(cfg.dt > 0.0) || !(cfg.duration > 0.0)) throw std::invalid_argument("--dt and --duration must be positive");
    cfg.seed = raw.seed;
    cfg.out_path = raw.out;
    cfg.noise = parse_noise(raw.noise);
    if (!raw.log.empty()) cfg.log_path = raw.log;
    if (!raw.origin.empty()) {
      const Vec3 o = parse_triple(raw.origin);
      LlaFix fix{o.x(), o.y(), o.z(), 0.0};
      fix.validate();
      cfg.origin = fix;
    }
    if (!raw.mag_ref.empty()) {
      cfg.mag_reference = parse_triple(raw.mag_ref);
      if (cfg.mag_reference->norm() == 0.0) throw std::invalid_argument("--mag-ref must be nonzero");
    }
    if (!raw.init.empty()) cfg.init = raw.init == "zero" ? InitKind::zero : InitKind::extreme;
    if (!raw.export_log.empty()) cfg.export_log_path = raw.export_log;
    if (raw.fault == "flip-wgamma") cfg.fault = CorrectionFault::flip_wgamma;
  } catch (const std::invalid_argument& e) {
    err << "syncnav: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    switch (cfg.mode) {
      case Mode::simulate: {
        const SimulationResult r = run_simulate(cfg);
        out << "simulated " << r.summary.steps << " steps; terminal attitude error "
            << r.summary.terminal.attitude_angle << " rad, position error "
            << r.summary.terminal.position_error << " m\n";
        return kExitOk;
      }
      case Mode::replay: {
        const ReplayResult r = run_replay(cfg);
        out << "replayed " << r.rows.size() << " imu samples";
        if (r.unobservable_fraction > 0.0) {
          out << "; unobservable segment: " << std::lround(100.0 * r.unobservable_fraction) << "%";
        }
        out << "\n";
        return kExitOk;
      }
      case Mode::check: {
        const auto results = run_check(cfg);
        out << format_report(results);
        for (const auto& r : results)
          if (!r.passed) return kExitCheckFailed;
        return kExitOk;
      }
    }
  } catch (const DataError& e) {
    err << "syncnav: " << e.what() << "\n";
    return kExitData;
  } catch (const SingularAuxiliaryError& e) {
    err << "syncnav: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "syncnav: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace syncnav::app
