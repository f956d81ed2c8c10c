// Copyright 2026 The nvreadout Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef NVREADOUT_MONTE_CARLO_H_
#define NVREADOUT_MONTE_CARLO_H_

#include <cstdint>
#include <vector>

#include "nvreadout/charge_dynamics.h"
#include "nvreadout/photon_statistics.h"
#include "nvreadout/scc_model.h"

namespace nvreadout {

/// One constant-illumination interval of a pulse sequence.
struct PulseSegment {
  double duration_ms = 0.0;
  double gamma_ion_khz = 0.0;
  double gamma_rec_khz = 0.0;
  double emit_rate_minus_kcps = 0.0;
  double emit_rate_zero_kcps = 0.0;
  bool record_photons = false;

  void Validate() const;
};

struct TrajectoryConfig {
  std::uint64_t seed = 0;
  std::int64_t shots = 1;

  void Validate() const;
};

/// Switching events allowed in one segment of one shot.
inline constexpr std::int64_t kMaxEventsPerSegment = 1'000'000;

/// Per-shot outcome of a sequence, stored column-wise.
struct SequenceRecords {
  std::int64_t shots = 0;
  int recorded_segments = 0;
  std::vector<std::uint8_t> initial_minus;  // 1 if the shot started in NV-
  std::vector<std::uint8_t> final_minus;    // 1 if the shot ended in NV-
  /// photons[shot * recorded_segments + k] for the k-th recorded segment.
  std::vector<std::int64_t> photons;

  std::int64_t photon_count(std::int64_t shot, int k) const {
    return photons[static_cast<std::size_t>(shot * recorded_segments + k)];
  }
  PhotonHistogram Histogram(int k) const;
  double FinalMinusFraction() const;
};

/// Gillespie simulation of the two-state charge chain with Poisson photon
/// emission.  Shot i draws from substream i of `config.seed`, so the
/// output does not depend on the number of threads.  Throws
/// std::runtime_error when a segment exceeds kMaxEventsPerSegment.
SequenceRecords RunSequence(const std::vector<PulseSegment>& segments,
                            const ChargePopulation& initial,
                            const TrajectoryConfig& config);

/// Single-threaded reference implementation of RunSequence.
SequenceRecords RunSequenceSerial(const std::vector<PulseSegment>& segments,
                                  const ChargePopulation& initial,
                                  const TrajectoryConfig& config);

/// A single recorded readout window.
struct ChargeReadoutSetup {
  double readout_ms = 0.0;
  double emit_rate_minus_kcps = 0.0;
  double emit_rate_zero_kcps = 0.0;
  double gamma_ion_khz = 0.0;
  double gamma_rec_khz = 0.0;
};

/// Histogram of the photons detected in one readout window.
PhotonHistogram SimulateChargeHistogram(const ChargeReadoutSetup& setup,
                                        const ChargePopulation& initial,
                                        const TrajectoryConfig& config);

struct TransitionCounts {
  std::int64_t trials_from_minus = 0;
  std::int64_t ionizations = 0;     // NV- heralded, NV0 found
  std::int64_t trials_from_zero = 0;
  std::int64_t recombinations = 0;  // NV0 heralded, NV- found
};

/// `config.shots` trials per heralded initial charge state.  The final
/// state is classified exactly.  A verify step with nonzero
/// `verify_flip_prob` flips the true charge after heralding.
TransitionCounts SimulateRateExperiment(double gamma_ion_khz,
                                        double gamma_rec_khz,
                                        double pulse_ms,
                                        const TrajectoryConfig& config,
                                        double verify_flip_prob = 0.0);

struct SccSimulation {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta0_error = 0.0;  // binomial standard error
  double beta1_error = 0.0;
};

/// Per-shot sampling of each cycle's branch decisions from the columns of
/// the excitation, relaxation and ionization matrices.  ms=0 shots use
/// even substreams, ms=+-1 shots odd ones.
SccSimulation SimulateScc(const SccParams& params, int cycles,
                          const TrajectoryConfig& config);

SccSimulation SimulateSccSerial(const SccParams& params, int cycles,
                                const TrajectoryConfig& config);

}  // namespace nvreadout

#endif  // NVREADOUT_MONTE_CARLO_H_
