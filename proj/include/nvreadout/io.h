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


#ifndef NVREADOUT_IO_H_
#define NVREADOUT_IO_H_

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvreadout/charge_dynamics.h"
#include "nvreadout/estimation.h"
#include "nvreadout/monte_carlo.h"
#include "nvreadout/photon_statistics.h"
#include "nvreadout/protocol_optimizer.h"
#include "nvreadout/scc_model.h"

namespace nvreadout::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Raised for malformed documents, missing fields and wrong units.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quantities are stored as {"value": number, "unit": string}; an optional
// "note" string is ignored on read.
Json Quantity(double value, const std::string& unit);
double ReadQuantity(const Json& parent, const std::string& key,
                    const std::string& unit);

Json ToJson(const MultiphotonRateModel& m);
Json ToJson(const SteadyStateParams& p);
Json ToJson(const NirRatePolynomial& p);
Json ToJson(const DestructivityMatrix& d);
Json ToJson(const PoissonMixture& m);
Json ToJson(const CountRateModel& m);
Json ToJson(const SccParams& p);
Json ToJson(const SccEfficiency& e);
Json ToJson(const PlReadout& p);
Json ToJson(const PulseSegment& s);

MultiphotonRateModel RateModelFromJson(const Json& j);
SteadyStateParams SteadyStateParamsFromJson(const Json& j);
NirRatePolynomial NirPolynomialFromJson(const Json& j);
DestructivityMatrix DestructivityFromJson(const Json& j);
PoissonMixture MixtureFromJson(const Json& j);
CountRateModel CountRateModelFromJson(const Json& j);
SccParams SccParamsFromJson(const Json& j);
SccEfficiency SccEfficiencyFromJson(const Json& j);
PlReadout PlReadoutFromJson(const Json& j);
PulseSegment SegmentFromJson(const Json& j);

/// Everything the command-line tool needs to describe one NV center.
struct DeviceProfile {
  std::string name;
  MultiphotonRateModel rate_model;
  double green_uw = 1.0;
  NirRatePolynomial nir_ionization;
  NirRatePolynomial nir_recombination;
  double nir_interaction_ms = 10.0;
  DestructivityMatrix destructivity = DestructivityMatrix::Identity();
  PoissonMixture charge_readout;
  double charge_readout_ms = 3.0;
  CountRateModel count_rate;
  SccParams scc;
  int scc_cycles = 10;
  SccEfficiency scc_demonstrated;
  SccEfficiency scc_ideal;
  PlReadout pl;
  double tau_init_us = 1.0;

  void Validate() const;
};

Json ToJson(const DeviceProfile& p);
DeviceProfile ProfileFromJson(const Json& j);
DeviceProfile LoadProfile(const std::string& path);

/// Pulse-sequence experiment: initial charge plus an ordered segment list.
struct Experiment {
  ChargePopulation initial = ChargePopulation::Negative();
  std::vector<PulseSegment> segments;
};

Json ToJson(const Experiment& e);
Experiment ExperimentFromJson(const Json& j);

/// Non-finite numbers become null.
Json ToJson(const FitResult& fit);

Json ReadJsonFile(const std::string& path);

// CSV --------------------------------------------------------------------------

/// %.9g; non-finite values print as inf, -inf or nan.
std::string FormatNumber(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

void WriteCsv(std::ostream& out, const CsvTable& table);
/// Parses a numeric CSV with a header line.  Throws SchemaError on ragged
/// rows or non-numeric cells.
CsvTable ReadCsv(std::istream& in);
CsvTable ReadCsvFile(const std::string& path);

enum class HistogramFormat { kOccurrences, kProbability };

CsvTable HistogramToCsv(const PhotonHistogram& h, HistogramFormat format);
/// Accepts `photon_count,occurrences`.  A probability table is converted
/// to occurrences with `total` shots, rounding to the nearest integer.
PhotonHistogram HistogramFromCsv(const CsvTable& table,
                                 std::uint64_t total_for_probabilities = 0);
/// Returns probabilities for either histogram format.
std::vector<double> ProbabilitiesFromCsv(const CsvTable& table);

}  // namespace nvreadout::io

#endif  // NVREADOUT_IO_H_
