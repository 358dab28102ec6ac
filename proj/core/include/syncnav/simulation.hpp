#pragma once

// Drivers: the circular-flight simulation and flight-log replay. Both step the
// observer once per IMU sample with the held measurements at that sample.

#include <cstdint>
#include <optional>
#include <vector>

#include "syncnav/analysis.hpp"
#include "syncnav/ingest.hpp"
#include "syncnav/model.hpp"
#include "syncnav/observer.hpp"

namespace syncnav {

struct NoiseConfig {
  double gnss_sigma = 0.0;  // m and m/s
  double mag_sigma = 0.0;   // applied before normalization
};

struct SimulationConfig {
  Gains gains = preset_gains("pvm");
  double dt = 0.02;
  double duration = 50.0;
  ObserverState initial = ObserverState::extreme();
  WorldConstants world;
  NoiseConfig noise;
  std::uint64_t seed = 0;
  CorrectionFault fault = CorrectionFault::none;
  double pe_window = kDefaultPEWindow;
};

struct TraceRow {
  double t = 0.0;
  std::optional<SE23> truth;
  ObserverState state;
  std::optional<ErrorMetrics> metrics;
  double vbar_norm = 0.0;
  double pe_margin = 0.0;  // NaN until a full window is available
};

struct SimulationResult {
  std::vector<TraceRow> rows;
  // events[k] carries the input and measurements used for the step from
  // rows[k] to rows[k+1]; the last one holds the input for the next interval.
  std::vector<FusedEvent> events;
  RunSummary summary;
  bool conditioning_alarm = false;
};

SimulationResult simulate_circle(const SimulationConfig& cfg);

/// Synthetic log of a simulation: every IMU sample with the GNSS fix and
/// magnetometer reading used at that sample. Positions are written as
/// latitude/longitude/altitude about origin.
LogBundle export_log(const SimulationResult& result, const LlaFix& origin = {});

struct ReplayConfig {
  Gains gains = experiment_gains();
  ObserverState initial = ObserverState::zero();
  std::optional<LlaFix> origin;  // first GNSS fix when absent
  WorldConstants world{Vec3(0.0, 0.0, kStandardGravity), default_mag_reference()};
  CorrectionFault fault = CorrectionFault::none;
  double pe_window = kDefaultPEWindow;
};

struct ReplayResult {
  std::vector<TraceRow> rows;
  RunSummary summary;
  LlaFix origin;
  double unobservable_fraction = 0.0;  // steps stepped without a GNSS fix
  bool conditioning_alarm = false;
};

/// No correction of any kind is applied before the first GNSS fix.
ReplayResult replay(const LogBundle& log, const ReplayConfig& cfg);

}  // namespace syncnav
