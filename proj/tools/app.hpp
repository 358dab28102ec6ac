#pragma once

// Command-line driver: simulate, replay and check modes, flag parsing and the
// trace/summary writers.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "syncnav/simulation.hpp"

namespace syncnav::app {

enum class Mode { simulate, replay, check };
enum class InitKind { zero, extreme };

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

struct RunConfig {
  Mode mode = Mode::simulate;
  std::string preset;  // empty: mode default
  Gains gains;
  double dt = 0.02;
  double duration = 50.0;
  std::uint64_t seed = 0;
  std::optional<std::string> log_path;
  std::string out_path = ".";
  NoiseConfig noise;
  std::optional<LlaFix> origin;
  std::optional<Vec3> mag_reference;
  std::optional<InitKind> init;
  std::optional<std::string> export_log_path;
  CorrectionFault fault = CorrectionFault::none;
};

/// "k_p=1,k_c=0.5,kq=10,2" applied over base. Throws std::invalid_argument.
Gains parse_gains(const std::string& text, Gains base);
/// "gnss=0.5,mag=0.01". Throws std::invalid_argument.
NoiseConfig parse_noise(const std::string& text);
/// "a,b,c". Throws std::invalid_argument.
Vec3 parse_triple(const std::string& text);

/// Resolves preset and gain overrides for the mode.
Gains resolve_gains(const std::string& preset, const std::string& gains_text, Mode mode);

void write_trace(std::ostream& out, const std::vector<TraceRow>& rows);
std::string summary_json(const RunConfig& cfg, const RunSummary& s, std::size_t rows,
                         bool conditioning_alarm, const ReplayResult* replay);

SimulationResult run_simulate(const RunConfig& cfg);
ReplayResult run_replay(const RunConfig& cfg);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Reduced-scale invariant suite. The report holds no timings, so equal
/// configurations give identical bytes.
std::vector<CheckResult> run_check(const RunConfig& cfg);
std::string format_report(const std::vector<CheckResult>& results);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace syncnav::app
