#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "granule/config.hpp"

namespace granule {

/// One row of the radius time series.
struct StepRecord {
  double t = 0.0;
  double R = 0.0;
  double sigma_a = 0.0;
  double sigma_d = 0.0;
  double u_boundary = 0.0;
  BoundaryClassification classification = BoundaryClassification::SpaceLike;
};

struct ProfileSnapshot {
  double requested_time = 0.0;
  GranuleState state;
};

struct RunResult {
  std::string mode;  // "marching" or "picard"
  std::vector<StepRecord> series;
  std::vector<ProfileSnapshot> profiles;
  GranuleState final_state;
  int steps = 0;
  bool regime_exit = false;
  double exit_t = 0.0;
  double exit_R = 0.0;
  long clamped = 0;
  PicardHistory picard_history;
  std::optional<ContractionReport> contraction;
};

/// Called after every accepted marching step (and once for the initial state)
/// with the state at the record's time.
using StepObserver = std::function<void(const GranuleState&, const StepRecord&)>;

/// Extrapolated boundary velocity u(r_eval) from the nodal growth profile:
/// the nodal integral extended to r_eval with the boundary growth value.
double boundary_velocity(const CharacteristicGrid& grid, std::span<const double> G,
                         double r_eval);

/// State at t = 0: a single center node, empty granule.
GranuleState initial_state(const SimulationConfig& cfg);

/// Advances the state by one step: Heun on the characteristic grid, sessile
/// fractions, and the radius, quasi-static substrate/planktonic solves at both
/// stages, and one node born at the new free boundary. Throws RegimeExitError
/// in the general regime when sigma_a - sigma_d <= 0 at step entry.
void march_step(GranuleState& st, const SimulationConfig& cfg, const KineticsModel& kin);

/// Full time-marching run. A regime exit ends the run early and is recorded
/// on the result instead of propagating.
RunResult run_marching(const SimulationConfig& cfg, const KineticsModel& kin,
                       const StepObserver& observer = {});

/// Picard fixed-point run over [0, t_end]: contraction estimate first, then
/// the iteration. Throws NonConvergenceError when the estimate does not
/// certify the horizon unless numerics.allow_uncertified is set.
RunResult run_picard(const SimulationConfig& cfg, const KineticsModel& kin);

/// Writes radius.csv, profile_<time>.csv, and summary.json into out_dir.
void write_outputs(const RunResult& result, const SimulationConfig& cfg,
                   const std::string& out_dir);

const char* classification_name(BoundaryClassification c);

}  // namespace granule
