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


#include "nvreadout/monte_carlo.h"

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>

#include "nvreadout/rng.h"

namespace nvreadout {
namespace {

bool NonNegativeFinite(double v) { return v >= 0.0 && std::isfinite(v); }

// Runs body(i) for every shot.  The first exception raised inside the
// parallel region is rethrown afterwards.
template <typename Body>
void ForEachShot(std::int64_t shots, bool parallel, Body&& body) {
  if (!parallel) {
    for (std::int64_t i = 0; i < shots; ++i) body(i);
    return;
  }
  bool failed = false;
  std::string failure;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < shots; ++i) {
    try {
      body(i);
    } catch (const std::exception& e) {
#pragma omp critical(nvreadout_mc_failure)
      {
        if (!failed) {
          failed = true;
          failure = e.what();
        }
      }
    }
  }
  if (failed) throw std::runtime_error(failure);
}

std::int64_t SamplePoisson(CounterRng& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

// Advances one shot through a segment; returns photons emitted.
std::int64_t SimulateSegment(const PulseSegment& seg, bool* minus,
                             CounterRng& rng) {
  std::int64_t photons = 0;
  std::int64_t events = 0;
  double t = 0.0;
  while (true) {
    const double rate = *minus ? seg.gamma_ion_khz : seg.gamma_rec_khz;
    const double emit =
        *minus ? seg.emit_rate_minus_kcps : seg.emit_rate_zero_kcps;
    double dwell = seg.duration_ms - t;
    bool switched = false;
    if (rate > 0.0) {
      const double wait = -std::log1p(-rng.Uniform()) / rate;
      if (wait < dwell) {
        dwell = wait;
        switched = true;
      }
    }
    if (seg.record_photons) photons += SamplePoisson(rng, emit * dwell);
    if (!switched) break;
    t += dwell;
    *minus = !*minus;
    if (++events > kMaxEventsPerSegment) {
      throw std::runtime_error(
          "Gillespie event cap exceeded in one segment; rates x duration too large");
    }
  }
  return photons;
}

SequenceRecords Run(const std::vector<PulseSegment>& segments,
                    const ChargePopulation& initial,
                    const TrajectoryConfig& config, bool parallel) {
  config.Validate();
  int recorded = 0;
  for (const PulseSegment& s : segments) {
    s.Validate();
    if (s.record_photons) ++recorded;
  }
  SequenceRecords out;
  out.shots = config.shots;
  out.recorded_segments = recorded;
  const auto n = static_cast<std::size_t>(config.shots);
  out.initial_minus.assign(n, 0);
  out.final_minus.assign(n, 0);
  out.photons.assign(n * static_cast<std::size_t>(recorded), 0);
  const double p_minus = initial.p_minus();
  ForEachShot(config.shots, parallel, [&](std::int64_t i) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(i));
    bool minus = rng.Uniform() < p_minus;
    out.initial_minus[i] = minus;
    int k = 0;
    for (const PulseSegment& s : segments) {
      const std::int64_t photons = SimulateSegment(s, &minus, rng);
      if (s.record_photons) {
        out.photons[static_cast<std::size_t>(i * recorded + k)] = photons;
        ++k;
      }
    }
    out.final_minus[i] = minus;
  });
  return out;
}

int SampleColumn(const Matrix6& m, int column, CounterRng& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  int last = column;
  for (int row = 0; row < 6; ++row) {
    const double p = m(row, column);
    if (p <= 0.0) continue;
    acc += p;
    last = row;
    if (u < acc) return row;
  }
  return last;  // round-off in the column sum
}

SccSimulation Scc(const SccParams& params, int cycles,
                  const TrajectoryConfig& config, bool parallel) {
  config.Validate();
  if (cycles < 0) throw std::invalid_argument("cycles must be >= 0");
  const SccMatrices mats = BuildMatrices(params);
  const Vector6 start0 = InitialState(params, SpinState::kZero).populations();
  const Vector6 start1 =
      InitialState(params, SpinState::kPlusMinusOne).populations();
  const auto n = static_cast<std::size_t>(config.shots);
  std::vector<std::uint8_t> minus0(n), minus1(n);
  auto shot = [&](const Vector6& start, std::uint64_t stream) {
    CounterRng rng(config.seed, stream);
    const double u = rng.Uniform();
    double acc = 0.0;
    int level = 5;
    for (int k = 0; k < 6; ++k) {
      acc += start(k);
      if (u < acc) {
        level = k;
        break;
      }
    }
    for (int c = 0; c < cycles; ++c) {
      level = SampleColumn(mats.excite, level, rng);
      level = SampleColumn(mats.relax, level, rng);
      level = SampleColumn(mats.ionize, level, rng);
    }
    return static_cast<std::uint8_t>(level <= 1);
  };
  ForEachShot(config.shots, parallel, [&](std::int64_t i) {
    const auto s = static_cast<std::uint64_t>(i);
    minus0[i] = shot(start0, 2 * s);
    minus1[i] = shot(start1, 2 * s + 1);
  });
  std::int64_t k0 = 0, k1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    k0 += minus0[i];
    k1 += minus1[i];
  }
  const double shots = static_cast<double>(config.shots);
  SccSimulation out;
  out.beta0 = k0 / shots;
  out.beta1 = k1 / shots;
  out.beta0_error = std::sqrt(out.beta0 * (1.0 - out.beta0) / shots);
  out.beta1_error = std::sqrt(out.beta1 * (1.0 - out.beta1) / shots);
  return out;
}

}  // namespace

void PulseSegment::Validate() const {
  if (!NonNegativeFinite(duration_ms)) {
    throw std::invalid_argument("segment duration must be >= 0");
  }
  for (double r : {gamma_ion_khz, gamma_rec_khz, emit_rate_minus_kcps,
                   emit_rate_zero_kcps}) {
    if (!NonNegativeFinite(r)) {
      throw std::invalid_argument("segment rates must be finite and >= 0");
    }
  }
}

void TrajectoryConfig::Validate() const {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
}

PhotonHistogram SequenceRecords::Histogram(int k) const {
  if (k < 0 || k >= recorded_segments) {
    throw std::out_of_range("no such recorded segment");
  }
  PhotonHistogram h;
  for (std::int64_t i = 0; i < shots; ++i) {
    const auto c = static_cast<std::size_t>(photon_count(i, k));
    if (c >= h.occurrences.size()) h.occurrences.resize(c + 1, 0);
    ++h.occurrences[c];
  }
  return h;
}

double SequenceRecords::FinalMinusFraction() const {
  std::int64_t k = 0;
  for (std::uint8_t v : final_minus) k += v;
  return shots > 0 ? static_cast<double>(k) / shots : 0.0;
}

SequenceRecords RunSequence(const std::vector<PulseSegment>& segments,
                            const ChargePopulation& initial,
                            const TrajectoryConfig& config) {
  return Run(segments, initial, config, /*parallel=*/true);
}

SequenceRecords RunSequenceSerial(const std::vector<PulseSegment>& segments,
                                  const ChargePopulation& initial,
                                  const TrajectoryConfig& config) {
  return Run(segments, initial, config, /*parallel=*/false);
}

PhotonHistogram SimulateChargeHistogram(const ChargeReadoutSetup& setup,
                                        const ChargePopulation& initial,
                                        const TrajectoryConfig& config) {
  if (config.shots < 1) {
    throw std::invalid_argument("histogram needs at least one shot");
  }
  const PulseSegment readout{setup.readout_ms, setup.gamma_ion_khz,
                             setup.gamma_rec_khz, setup.emit_rate_minus_kcps,
                             setup.emit_rate_zero_kcps, true};
  return RunSequence({readout}, initial, config).Histogram(0);
}

TransitionCounts SimulateRateExperiment(double gamma_ion_khz,
                                        double gamma_rec_khz, double pulse_ms,
                                        const TrajectoryConfig& config,
                                        double verify_flip_prob) {
  config.Validate();
  if (!(verify_flip_prob >= 0.0 && verify_flip_prob <= 1.0)) {
    throw std::invalid_argument("verify flip probability must lie in [0, 1]");
  }
  const PulseSegment pulse{pulse_ms, gamma_ion_khz, gamma_rec_khz, 0.0, 0.0,
                           false};
  pulse.Validate();
  const auto n = static_cast<std::size_t>(config.shots);
  std::vector<std::uint8_t> from_minus(n), from_zero(n);
  ForEachShot(config.shots, true, [&](std::int64_t i) {
    for (int heralded = 0; heralded < 2; ++heralded) {
      CounterRng rng(config.seed, 2 * static_cast<std::uint64_t>(i) + heralded);
      const bool herald_minus = heralded == 0;
      bool minus = herald_minus;
      if (verify_flip_prob > 0.0 && rng.Uniform() < verify_flip_prob) {
        minus = !minus;
      }
      SimulateSegment(pulse, &minus, rng);
      (herald_minus ? from_minus : from_zero)[i] = minus != herald_minus;
    }
  });
  TransitionCounts out;
  out.trials_from_minus = config.shots;
  out.trials_from_zero = config.shots;
  for (std::size_t i = 0; i < n; ++i) {
    out.ionizations += from_minus[i];
    out.recombinations += from_zero[i];
  }
  return out;
}

SccSimulation SimulateScc(const SccParams& params, int cycles,
                          const TrajectoryConfig& config) {
  return Scc(params, cycles, config, /*parallel=*/true);
}

SccSimulation SimulateSccSerial(const SccParams& params, int cycles,
                                const TrajectoryConfig& config) {
  return Scc(params, cycles, config, /*parallel=*/false);
}

}  // namespace nvreadout
