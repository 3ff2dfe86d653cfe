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

#include "fwcbf/sim.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>

#include <fmt/format.h>

namespace fwcbf {
namespace {

// Static strided partition; fn must not throw.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int w = 1; w < threads; ++w) {
    pool.emplace_back([&fn, n, threads, w] {
      for (int i = w; i < n; i += threads) fn(i);
    });
  }
  for (int i = 0; i < n; i += threads) fn(i);
  for (std::thread& t : pool) t.join();
}

double Distance(const VehicleState& a, const VehicleState& b) {
  return std::hypot(a.px - b.px, a.py - b.py);
}

struct VehicleOutcome {
  FilterResult result;
  std::optional<Error> error;
};

void OpenOrFail(std::ofstream& out, const std::string& path) {
  out.open(path, std::ios::out | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kConfigError, "cannot write '" + path + "'");
  }
}

}  // namespace

int WorkerThreads() {
  if (const char* env = std::getenv("CBF_THREADS"); env != nullptr) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1 || n > 4096) {
      throw Error(ErrorCode::kConfigError,
                  std::string("CBF_THREADS must be a positive integer, got '") +
                      env + "'");
    }
    return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::pair<int, int>> PairList(int k) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

RunResult Run(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  auto [x, goals] = BuildCircleScenario(cfg);
  const ConstraintSet cs = cfg.BuildConstraints();
  const int k = cfg.k;
  const int q = cs.num_constraints();
  const std::vector<std::pair<int, int>> pairs = PairList(k);
  const std::vector<ControlInput> gamma(cs.maneuver->inputs().begin(),
                                        cs.maneuver->inputs().end());
  const bool decentralized = cfg.mode == FilterMode::kDecentralized;

  RunResult out;
  RunSummary& summary = out.summary;
  summary.threads = decentralized ? std::min(WorkerThreads(), k) : 1;
  summary.min_pair_distance = std::numeric_limits<double>::infinity();
  summary.min_h = std::numeric_limits<double>::infinity();

  const long steps = static_cast<long>(std::floor(cfg.t_end / cfg.dt + 1e-9));
  out.records.reserve(steps + 1);
  constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  for (long n = 0; n <= steps; ++n) {
    StepRecord rec;
    rec.t = n * cfg.dt;
    rec.poses = x.vehicles;
    rec.nominal.resize(k);
    for (int i = 0; i < k; ++i) {
      rec.nominal[i] =
          NominalController(x[i], goals.goals[i], cfg.bounds, cfg.lambda);
    }
    rec.filtered.resize(k);
    rec.qp_iterations.assign(k, 0);
    rec.h.assign(q, kMissing);

    std::optional<Error> fatal;
    if (!decentralized) {
      try {
        const FilterResult r = CentralizedFilter(
            cs, cfg.alpha, x, FlattenInputs(rec.nominal), cfg.bounds,
            -cfg.unsafe_tolerance);
        rec.filtered = UnflattenInputs(r.u);
        rec.qp_iterations.assign(k, r.qp_iterations);
        rec.h = r.h;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kInfeasible) ++summary.infeasible_count;
        if (e.code() == ErrorCode::kInfeasible && cfg.fallback_maneuver) {
          rec.filtered = gamma;
          rec.fallback = true;
        } else {
          fatal = e;
        }
      }
    } else {
      std::vector<VehicleOutcome> outcomes(k);
      ParallelFor(k, summary.threads, [&](int i) {
        try {
          outcomes[i].result = DecentralizedFilter(cs, cfg.alpha, x,
                                                   rec.nominal[i], i,
                                                   cfg.bounds,
                                                   -cfg.unsafe_tolerance);
        } catch (const Error& e) {
          outcomes[i].error = e;
        }
      });
      for (int i = 0; i < k && !fatal; ++i) {
        if (!outcomes[i].error) {
          const FilterResult& r = outcomes[i].result;
          rec.filtered[i] = {r.u(0), r.u(1)};
          rec.qp_iterations[i] = r.qp_iterations;
          for (std::size_t a = 0; a < cs.a_sets[i].size(); ++a) {
            rec.h[cs.a_sets[i][a]] = r.h[a];
          }
          continue;
        }
        const Error& e = *outcomes[i].error;
        if (e.code() == ErrorCode::kInfeasible) ++summary.infeasible_count;
        if (e.code() == ErrorCode::kInfeasible && cfg.fallback_maneuver) {
          rec.filtered[i] = gamma[i];
          rec.fallback = true;
        } else {
          fatal = e;
        }
      }
    }
    if (fatal) {
      summary.failure = RunFailure{fatal->code(), fatal->message(), rec.t};
      break;
    }
    if (rec.fallback) {
      ++summary.fallback_count;
      for (int j = 0; j < q; ++j) {
        if (std::isnan(rec.h[j])) rec.h[j] = BarrierValue(cs.barriers[j], x);
      }
    }

    rec.distance.resize(q);
    for (int j = 0; j < q; ++j) {
      rec.distance[j] = Distance(x[pairs[j].first], x[pairs[j].second]);
      summary.min_pair_distance =
          std::min(summary.min_pair_distance, rec.distance[j]);
      summary.min_h = std::min(summary.min_h, rec.h[j]);
    }
    for (int i = 0; i < k; ++i) {
      if (!cfg.bounds.Contains(rec.filtered[i], kMembershipSlack)) {
        ++summary.actuator_violation_count;
      }
    }
    const std::vector<ControlInput> applied = rec.filtered;
    out.records.push_back(std::move(rec));
    if (n < steps) x = IntegrateRk4(x, applied, cfg.dt);
  }

  summary.num_records = static_cast<int>(out.records.size());
  summary.wall_time = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return out;
}

AuditReport Audit(const std::vector<StepRecord>& records,
                  const ConstraintSet& cs, const AlphaFunction& alpha,
                  const ControlBounds& bounds, FilterMode mode) {
  AuditReport report;
  const int k = cs.num_vehicles;
  const ControlLayout layout = ControlLayout::Uniform(k, kControlDim);
  const std::vector<VehiclePolytope> polytopes(
      k, VehiclePolytope::FromBounds(bounds));
  const Eigen::VectorXd gamma = cs.maneuver->Stacked();
  auto add = [&report](AuditViolation::Kind kind, double t, int vehicle,
                       int constraint) {
    report.violations.push_back({kind, t, vehicle, constraint});
    switch (kind) {
      case AuditViolation::Kind::kActuator:
        ++report.actuator_violations;
        break;
      case AuditViolation::Kind::kBarrierRow:
        ++report.row_violations;
        break;
      case AuditViolation::Kind::kEvaluation:
        ++report.evaluation_errors;
        break;
    }
  };

  for (const StepRecord& rec : records) {
    if (static_cast<int>(rec.filtered.size()) != k ||
        static_cast<int>(rec.poses.size()) != k) {
      add(AuditViolation::Kind::kEvaluation, rec.t, -1, -1);
      continue;
    }
    for (int i = 0; i < k; ++i) {
      if (!bounds.Contains(rec.filtered[i], kMembershipSlack)) {
        add(AuditViolation::Kind::kActuator, rec.t, i, -1);
      }
    }
    std::vector<BarrierRow> rows;
    try {
      rows = EvaluateRows(cs, StackedState{rec.poses});
    } catch (const Error&) {
      add(AuditViolation::Kind::kEvaluation, rec.t, -1, -1);
      continue;
    }
    const MembershipReport m = RowMembership(
        rows, alpha, FlattenInputs(rec.filtered), gamma, layout, polytopes);
    if (mode == FilterMode::kCentralized) {
      for (int j = 0; j < cs.num_constraints(); ++j) {
        if (!m.centralized_rows[j]) {
          add(AuditViolation::Kind::kBarrierRow, rec.t, -1, j);
        }
      }
    } else {
      for (int i = 0; i < k; ++i) {
        for (std::size_t a = 0; a < cs.a_sets[i].size(); ++a) {
          if (!m.decentralized_rows[i][a]) {
            add(AuditViolation::Kind::kBarrierRow, rec.t, i,
                cs.a_sets[i][a]);
          }
        }
      }
    }
  }
  return report;
}

void WriteTrajectoryCsv(const std::string& path,
                        const std::vector<StepRecord>& records) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf),
                 "t,vehicle,px,py,theta,v_nominal,omega_nominal,v,omega,"
                 "qp_iterations\n");
  for (const StepRecord& rec : records) {
    for (std::size_t i = 0; i < rec.poses.size(); ++i) {
      const VehicleState& p = rec.poses[i];
      fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{}\n",
                     rec.t, i, p.px, p.py, p.theta, rec.nominal[i].v,
                     rec.nominal[i].omega, rec.filtered[i].v,
                     rec.filtered[i].omega, rec.qp_iterations[i]);
    }
  }
  std::ofstream out;
  OpenOrFail(out, path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void WritePairsCsv(const std::string& path,
                   const std::vector<StepRecord>& records) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "t,i,j,distance,h\n");
  std::vector<std::pair<int, int>> pairs;
  for (const StepRecord& rec : records) {
    if (pairs.empty()) pairs = PairList(static_cast<int>(rec.poses.size()));
    for (std::size_t j = 0; j < rec.distance.size(); ++j) {
      fmt::format_to(std::back_inserter(buf), "{},{},{},{},{}\n", rec.t,
                     pairs[j].first, pairs[j].second, rec.distance[j],
                     rec.h[j]);
    }
  }
  std::ofstream out;
  OpenOrFail(out, path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string FormatSummary(const ScenarioConfig& cfg,
                          const RunSummary& summary) {
  fmt::memory_buffer buf;
  auto line = [&buf](std::string_view key, auto value) {
    fmt::format_to(std::back_inserter(buf), "{}: {}\n", key, value);
  };
  line("scenario", cfg.name);
  line("mode", FilterModeName(cfg.mode));
  line("vehicles", cfg.k);
  line("constraints", cfg.k * (cfg.k - 1) / 2);
  line("dt", cfg.dt);
  line("t_end", cfg.t_end);
  line("kappa", cfg.alpha.kappa);
  line("psi_deg", cfg.psi / kDegree);
  line("records", summary.num_records);
  line("min_pair_distance", summary.min_pair_distance);
  line("min_h", summary.min_h);
  line("actuator_violation_count", summary.actuator_violation_count);
  line("infeasible_count", summary.infeasible_count);
  line("fallback_count", summary.fallback_count);
  line("threads", summary.threads);
  line("wall_time_s", fmt::format("{:.3f}", summary.wall_time));
  if (summary.failure) {
    line("status", "aborted");
    line("error", ErrorCodeName(summary.failure->code));
    line("error_time", summary.failure->t);
    line("error_message", summary.failure->message);
  } else {
    line("status", "completed");
  }
  return fmt::to_string(buf);
}

}  // namespace fwcbf
