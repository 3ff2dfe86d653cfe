// Copyright 2026 The fwcbf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fixed-step simulation: snapshot, nominal inputs, safety filter, RK4 step,
// log. Also the post-hoc audit of logged inputs and the CSV writers.

#ifndef FWCBF_SIM_H_
#define FWCBF_SIM_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fwcbf/dynamics.h"
#include "fwcbf/error.h"
#include "fwcbf/scenario.h"
#include "fwcbf/supervisor.h"

namespace fwcbf {

struct StepRecord {
  double t = 0.0;
  std::vector<VehicleState> poses;
  std::vector<ControlInput> nominal;
  std::vector<ControlInput> filtered;
  std::vector<int> qp_iterations;   // per vehicle; centralized repeats one
  std::vector<double> distance;     // per constraint, pair order
  std::vector<double> h;            // per constraint
  bool fallback = false;            // the shared maneuver replaced the QP
};

struct RunFailure {
  ErrorCode code = ErrorCode::kInfeasible;
  std::string message;
  double t = 0.0;
};

struct RunSummary {
  double min_pair_distance = 0.0;
  double min_h = 0.0;
  int actuator_violation_count = 0;
  int infeasible_count = 0;
  int fallback_count = 0;
  double wall_time = 0.0;  // seconds
  int num_records = 0;
  int threads = 1;
  std::optional<RunFailure> failure;
};

struct RunResult {
  std::vector<StepRecord> records;
  RunSummary summary;
};

// Worker count for the decentralized fan-out: CBF_THREADS if set, else the
// number of logical cores. Throws Error(kConfigError) on a malformed value.
int WorkerThreads();

// Config errors and an unsafe start are thrown; failures during the loop are
// recorded in the summary and the records logged so far are returned.
RunResult Run(const ScenarioConfig& cfg);

// Pairs (i, j), i < j, in constraint order.
std::vector<std::pair<int, int>> PairList(int k);

struct AuditViolation {
  enum class Kind { kActuator, kBarrierRow, kEvaluation };
  Kind kind = Kind::kActuator;
  double t = 0.0;
  int vehicle = -1;     // -1 for centralized rows
  int constraint = -1;  // -1 for actuator violations
};

struct AuditReport {
  std::vector<AuditViolation> violations;
  int actuator_violations = 0;
  int row_violations = 0;
  int evaluation_errors = 0;  // rows that could not be re-evaluated
};

// Re-checks every logged filtered input against the actuator box and the
// rows of the given mode. Fallback steps are checked like any other.
AuditReport Audit(const std::vector<StepRecord>& records,
                  const ConstraintSet& cs, const AlphaFunction& alpha,
                  const ControlBounds& bounds, FilterMode mode);

// Header: t,vehicle,px,py,theta,v_nominal,omega_nominal,v,omega,qp_iterations
void WriteTrajectoryCsv(const std::string& path,
                        const std::vector<StepRecord>& records);
// Header: t,i,j,distance,h
void WritePairsCsv(const std::string& path,
                   const std::vector<StepRecord>& records);

std::string FormatSummary(const ScenarioConfig& cfg,
                          const RunSummary& summary);

}  // namespace fwcbf

#endif  // FWCBF_SIM_H_
