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


#include "nvreadout/io.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace nvreadout::io {
namespace {

const Json& Field(const Json& parent, const std::string& key) {
  if (!parent.is_object() || !parent.contains(key)) {
    throw SchemaError("missing field '" + key + "'");
  }
  return parent.at(key);
}

Json Number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void CheckVersion(const Json& j) {
  const Json& v = Field(j, "schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw SchemaError("unsupported schema_version (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
}

template <typename T>
T Validated(T value) {
  try {
    value.Validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return value;
}

}  // namespace

Json Quantity(double value, const std::string& unit) {
  return Json{{"value", value}, {"unit", unit}};
}

double ReadQuantity(const Json& parent, const std::string& key,
                    const std::string& unit) {
  const Json& q = Field(parent, key);
  if (!q.is_object()) {
    throw SchemaError("field '" + key + "' must be {\"value\", \"unit\"}");
  }
  const Json& u = Field(q, "unit");
  if (!u.is_string() || u.get<std::string>() != unit) {
    throw SchemaError("unit mismatch for '" + key + "': expected '" + unit +
                      "', got " + u.dump());
  }
  const Json& v = Field(q, "value");
  if (!v.is_number()) {
    throw SchemaError("field '" + key + "' has a non-numeric value");
  }
  return v.get<double>();
}

Json ToJson(const MultiphotonRateModel& m) {
  return {{"c20", Quantity(m.c20, "kHz/uW^2")},
          {"c11", Quantity(m.c11, "kHz/(uW mW)")},
          {"c12", Quantity(m.c12, "kHz/(uW mW^2)")},
          {"d20", Quantity(m.d20, "kHz/uW^2")},
          {"d11", Quantity(m.d11, "kHz/(uW mW)")}};
}

MultiphotonRateModel RateModelFromJson(const Json& j) {
  MultiphotonRateModel m;
  m.c20 = ReadQuantity(j, "c20", "kHz/uW^2");
  m.c11 = ReadQuantity(j, "c11", "kHz/(uW mW)");
  m.c12 = ReadQuantity(j, "c12", "kHz/(uW mW^2)");
  m.d20 = ReadQuantity(j, "d20", "kHz/uW^2");
  m.d11 = ReadQuantity(j, "d11", "kHz/(uW mW)");
  return Validated(m);
}

Json ToJson(const SteadyStateParams& p) {
  return {{"alpha", Quantity(p.alpha, "1/mW")},
          {"beta", Quantity(p.beta, "1/mW^2")},
          {"gamma", Quantity(p.gamma, "1")},
          {"delta", Quantity(p.delta, "1/mW")}};
}

SteadyStateParams SteadyStateParamsFromJson(const Json& j) {
  SteadyStateParams p;
  p.alpha = ReadQuantity(j, "alpha", "1/mW");
  p.beta = ReadQuantity(j, "beta", "1/mW^2");
  p.gamma = ReadQuantity(j, "gamma", "1");
  p.delta = ReadQuantity(j, "delta", "1/mW");
  return Validated(p);
}

Json ToJson(const NirRatePolynomial& p) {
  return {{"a", Quantity(p.a, "kHz/mW^3")},
          {"b", Quantity(p.b, "kHz/mW^2")},
          {"c", Quantity(p.c, "kHz")}};
}

NirRatePolynomial NirPolynomialFromJson(const Json& j) {
  NirRatePolynomial p;
  p.a = ReadQuantity(j, "a", "kHz/mW^3");
  p.b = ReadQuantity(j, "b", "kHz/mW^2");
  p.c = ReadQuantity(j, "c", "kHz");
  return Validated(p);
}

Json ToJson(const DestructivityMatrix& d) {
  const auto& m = d.entries();
  return {{"matrix", {{m[0][0], m[0][1]}, {m[1][0], m[1][1]}}},
          {"unit", "1"},
          {"layout", "entry[i][j] = P(final i | initial j); index 0 = NV-"}};
}

DestructivityMatrix DestructivityFromJson(const Json& j) {
  const Json& m = Field(j, "matrix");
  if (Field(j, "unit") != "1") throw SchemaError("destructivity unit must be '1'");
  if (!m.is_array() || m.size() != 2 || m[0].size() != 2 || m[1].size() != 2) {
    throw SchemaError("destructivity matrix must be 2x2");
  }
  std::array<std::array<double, 2>, 2> a{};
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      if (!m[i][k].is_number()) throw SchemaError("non-numeric matrix entry");
      a[i][k] = m[i][k].get<double>();
    }
  }
  try {
    return DestructivityMatrix(a);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

Json ToJson(const PoissonMixture& m) {
  return {{"eta_zero", Quantity(m.eta_zero, "photons")},
          {"eta_minus", Quantity(m.eta_minus, "photons")},
          {"weight_minus", Quantity(m.weight_minus, "1")}};
}

PoissonMixture MixtureFromJson(const Json& j) {
  PoissonMixture m;
  m.eta_zero = ReadQuantity(j, "eta_zero", "photons");
  m.eta_minus = ReadQuantity(j, "eta_minus", "photons");
  m.weight_minus = ReadQuantity(j, "weight_minus", "1");
  return Validated(m);
}

Json ToJson(const CountRateModel& m) {
  return {{"collection_efficiency", Quantity(m.collection_efficiency, "1")},
          {"gamma_sat", Quantity(m.gamma_sat_mhz, "MHz")},
          {"bg_slope", Quantity(m.bg_slope_kcps, "kcps")},
          {"dark_rate", Quantity(m.dark_rate_hz, "Hz")},
          {"tau_r0", Quantity(m.tau_r0_ns, "ns")}};
}

CountRateModel CountRateModelFromJson(const Json& j) {
  CountRateModel m;
  m.collection_efficiency = ReadQuantity(j, "collection_efficiency", "1");
  m.gamma_sat_mhz = ReadQuantity(j, "gamma_sat", "MHz");
  m.bg_slope_kcps = ReadQuantity(j, "bg_slope", "kcps");
  m.dark_rate_hz = ReadQuantity(j, "dark_rate", "Hz");
  m.tau_r0_ns = ReadQuantity(j, "tau_r0", "ns");
  return Validated(m);
}

Json ToJson(const SccParams& p) {
  return {{"p_ion", Quantity(p.p_ion, "1")},
          {"k35", Quantity(p.k35, "1")},
          {"k45", Quantity(p.k45, "1")},
          {"p_sing", Quantity(p.p_sing, "1")},
          {"k51_over_k52", Quantity(p.k51_over_k52, "1")},
          {"spin_init", Quantity(p.spin_init, "1")},
          {"charge_init_nv0", Quantity(p.charge_init_nv0, "1")}};
}

SccParams SccParamsFromJson(const Json& j) {
  SccParams p;
  p.p_ion = ReadQuantity(j, "p_ion", "1");
  p.k35 = ReadQuantity(j, "k35", "1");
  p.k45 = ReadQuantity(j, "k45", "1");
  p.p_sing = ReadQuantity(j, "p_sing", "1");
  p.k51_over_k52 = ReadQuantity(j, "k51_over_k52", "1");
  p.spin_init = ReadQuantity(j, "spin_init", "1");
  p.charge_init_nv0 = ReadQuantity(j, "charge_init_nv0", "1");
  return Validated(p);
}

Json ToJson(const SccEfficiency& e) {
  return {{"beta0", Quantity(e.beta0, "1")}, {"beta1", Quantity(e.beta1, "1")}};
}

SccEfficiency SccEfficiencyFromJson(const Json& j) {
  SccEfficiency e{ReadQuantity(j, "beta0", "1"), ReadQuantity(j, "beta1", "1")};
  for (double b : {e.beta0, e.beta1}) {
    if (!(b >= 0.0 && b <= 1.0)) throw SchemaError("beta must lie in [0, 1]");
  }
  return e;
}

Json ToJson(const PlReadout& p) {
  return {{"alpha0", Quantity(p.alpha0, "photons")},
          {"alpha1", Quantity(p.alpha1, "photons")},
          {"tau_read", Quantity(p.tau_read_us, "us")}};
}

PlReadout PlReadoutFromJson(const Json& j) {
  PlReadout p;
  p.alpha0 = ReadQuantity(j, "alpha0", "photons");
  p.alpha1 = ReadQuantity(j, "alpha1", "photons");
  p.tau_read_us = ReadQuantity(j, "tau_read", "us");
  if (!(p.alpha0 >= 0.0 && p.alpha1 >= 0.0 && p.tau_read_us > 0.0)) {
    throw SchemaError("PL readout needs alpha >= 0 and tau_read > 0");
  }
  return p;
}

Json ToJson(const PulseSegment& s) {
  return {{"duration", Quantity(s.duration_ms, "ms")},
          {"gamma_ion", Quantity(s.gamma_ion_khz, "kHz")},
          {"gamma_rec", Quantity(s.gamma_rec_khz, "kHz")},
          {"emit_rate_minus", Quantity(s.emit_rate_minus_kcps, "kcps")},
          {"emit_rate_zero", Quantity(s.emit_rate_zero_kcps, "kcps")},
          {"record_photons", s.record_photons}};
}

PulseSegment SegmentFromJson(const Json& j) {
  PulseSegment s;
  s.duration_ms = ReadQuantity(j, "duration", "ms");
  s.gamma_ion_khz = ReadQuantity(j, "gamma_ion", "kHz");
  s.gamma_rec_khz = ReadQuantity(j, "gamma_rec", "kHz");
  s.emit_rate_minus_kcps = ReadQuantity(j, "emit_rate_minus", "kcps");
  s.emit_rate_zero_kcps = ReadQuantity(j, "emit_rate_zero", "kcps");
  const Json& r = Field(j, "record_photons");
  if (!r.is_boolean()) throw SchemaError("record_photons must be a boolean");
  s.record_photons = r.get<bool>();
  return Validated(s);
}

// ---------------------------------------------------------------------------

void DeviceProfile::Validate() const {
  rate_model.Validate();
  nir_ionization.Validate();
  nir_recombination.Validate();
  charge_readout.Validate();
  count_rate.Validate();
  scc.Validate();
  if (!(green_uw > 0.0)) throw std::invalid_argument("green power must be > 0");
  if (!(nir_interaction_ms > 0.0)) {
    throw std::invalid_argument("NIR interaction time must be > 0");
  }
  if (!(charge_readout_ms > 0.0)) {
    throw std::invalid_argument("charge readout window must be > 0");
  }
  if (scc_cycles < 0) throw std::invalid_argument("scc cycles must be >= 0");
  if (tau_init_us < 0.0) throw std::invalid_argument("tau_init must be >= 0");
}

Json ToJson(const DeviceProfile& p) {
  return {{"schema_version", kSchemaVersion},
          {"name", p.name},
          {"rate_model", ToJson(p.rate_model)},
          {"green_power", Quantity(p.green_uw, "uW")},
          {"nir_ionization", ToJson(p.nir_ionization)},
          {"nir_recombination", ToJson(p.nir_recombination)},
          {"nir_interaction_time", Quantity(p.nir_interaction_ms, "ms")},
          {"destructivity", ToJson(p.destructivity)},
          {"charge_readout", ToJson(p.charge_readout)},
          {"charge_readout_window", Quantity(p.charge_readout_ms, "ms")},
          {"count_rate", ToJson(p.count_rate)},
          {"scc", ToJson(p.scc)},
          {"scc_cycles", p.scc_cycles},
          {"scc_demonstrated", ToJson(p.scc_demonstrated)},
          {"scc_ideal", ToJson(p.scc_ideal)},
          {"pl_readout", ToJson(p.pl)},
          {"tau_init", Quantity(p.tau_init_us, "us")}};
}

DeviceProfile ProfileFromJson(const Json& j) {
  CheckVersion(j);
  DeviceProfile p;
  const Json& name = Field(j, "name");
  if (!name.is_string()) throw SchemaError("name must be a string");
  p.name = name.get<std::string>();
  p.rate_model = RateModelFromJson(Field(j, "rate_model"));
  p.green_uw = ReadQuantity(j, "green_power", "uW");
  p.nir_ionization = NirPolynomialFromJson(Field(j, "nir_ionization"));
  p.nir_recombination = NirPolynomialFromJson(Field(j, "nir_recombination"));
  p.nir_interaction_ms = ReadQuantity(j, "nir_interaction_time", "ms");
  p.destructivity = DestructivityFromJson(Field(j, "destructivity"));
  p.charge_readout = MixtureFromJson(Field(j, "charge_readout"));
  p.charge_readout_ms = ReadQuantity(j, "charge_readout_window", "ms");
  p.count_rate = CountRateModelFromJson(Field(j, "count_rate"));
  p.scc = SccParamsFromJson(Field(j, "scc"));
  const Json& cycles = Field(j, "scc_cycles");
  if (!cycles.is_number_integer()) throw SchemaError("scc_cycles must be an integer");
  p.scc_cycles = cycles.get<int>();
  p.scc_demonstrated = SccEfficiencyFromJson(Field(j, "scc_demonstrated"));
  p.scc_ideal = SccEfficiencyFromJson(Field(j, "scc_ideal"));
  p.pl = PlReadoutFromJson(Field(j, "pl_readout"));
  p.tau_init_us = ReadQuantity(j, "tau_init", "us");
  try {
    p.Validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return p;
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("invalid JSON in '" + path + "': " + e.what());
  }
}

DeviceProfile LoadProfile(const std::string& path) {
  return ProfileFromJson(ReadJsonFile(path));
}

Json ToJson(const Experiment& e) {
  Json segments = Json::array();
  for (const PulseSegment& s : e.segments) segments.push_back(ToJson(s));
  return {{"schema_version", kSchemaVersion},
          {"initial_p_minus", Quantity(e.initial.p_minus(), "1")},
          {"segments", segments}};
}

Experiment ExperimentFromJson(const Json& j) {
  CheckVersion(j);
  Experiment e;
  const double p = ReadQuantity(j, "initial_p_minus", "1");
  try {
    e.initial = ChargePopulation::FromMinus(p);
  } catch (const std::invalid_argument& err) {
    throw SchemaError(err.what());
  }
  const Json& segments = Field(j, "segments");
  if (!segments.is_array() || segments.empty()) {
    throw SchemaError("segments must be a non-empty array");
  }
  for (const Json& s : segments) e.segments.push_back(SegmentFromJson(s));
  return e;
}

Json ToJson(const FitResult& fit) {
  Json params = Json::array();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params.push_back({{"name", fit.names[i]},
                      {"unit", fit.units[i]},
                      {"value", Number(fit.values(i))},
                      {"sigma", Number(fit.sigma(fit.names[i]))},
                      {"ci65_half_width", Number(fit.ci65(i))},
                      {"ci95_half_width", Number(fit.ci95(i))}});
  }
  Json cov = Json::array();
  for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) {
      row.push_back(Number(fit.covariance(r, c)));
    }
    cov.push_back(row);
  }
  return {{"schema_version", kSchemaVersion},
          {"parameters", params},
          {"covariance", cov},
          {"r_squared", Number(fit.r_squared)},
          {"chi_squared", Number(fit.chi_squared)},
          {"dof", fit.dof},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"flags", fit.flags}};
}

// CSV ----------------------------------------------------------------------------

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw SchemaError("CSV has no column '" + name + "'");
}

void WriteCsv(std::ostream& out, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << FormatNumber(row[i]);
    }
    out << '\n';
  }
}

CsvTable ReadCsv(std::istream& in) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  if (!std::getline(in, line)) throw SchemaError("empty CSV");
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw SchemaError("CSV line " + std::to_string(line_no) +
                        " has the wrong number of cells");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.size() || c.empty()) {
        throw SchemaError("CSV line " + std::to_string(line_no) +
                          ": non-numeric cell '" + c + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable ReadCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return ReadCsv(in);
}

CsvTable HistogramToCsv(const PhotonHistogram& h, HistogramFormat format) {
  CsvTable t;
  if (format == HistogramFormat::kOccurrences) {
    t.header = {"photon_count", "occurrences"};
    for (std::size_t n = 0; n < h.occurrences.size(); ++n) {
      t.rows.push_back({static_cast<double>(n),
                        static_cast<double>(h.occurrences[n])});
    }
  } else {
    t.header = {"photon_count", "probability"};
    const auto p = h.Probabilities();
    for (std::size_t n = 0; n < p.size(); ++n) {
      t.rows.push_back({static_cast<double>(n), p[n]});
    }
  }
  return t;
}

namespace {

std::size_t CountIndex(double v) {
  if (!(v >= 0.0) || v != std::floor(v)) {
    throw SchemaError("photon_count must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

PhotonHistogram HistogramFromCsv(const CsvTable& table,
                                 std::uint64_t total_for_probabilities) {
  const std::size_t nc = table.column("photon_count");
  const bool occurrences =
      std::find(table.header.begin(), table.header.end(), "occurrences") !=
      table.header.end();
  const std::size_t vc =
      occurrences ? table.column("occurrences") : table.column("probability");
  if (!occurrences && total_for_probabilities == 0) {
    throw SchemaError("probability histogram needs a total shot count");
  }
  PhotonHistogram h;
  for (const auto& row : table.rows) {
    const std::size_t n = CountIndex(row[nc]);
    const double v = row[vc];
    if (!(v >= 0.0)) throw SchemaError("histogram entries must be >= 0");
    if (n >= h.occurrences.size()) h.occurrences.resize(n + 1, 0);
    h.occurrences[n] += static_cast<std::uint64_t>(
        occurrences ? v : std::llround(v * static_cast<double>(total_for_probabilities)));
  }
  return h;
}

std::vector<double> ProbabilitiesFromCsv(const CsvTable& table) {
  const std::size_t nc = table.column("photon_count");
  const bool occurrences =
      std::find(table.header.begin(), table.header.end(), "occurrences") !=
      table.header.end();
  const std::size_t vc =
      occurrences ? table.column("occurrences") : table.column("probability");
  std::vector<double> p;
  double total = 0.0;
  for (const auto& row : table.rows) {
    const std::size_t n = CountIndex(row[nc]);
    if (!(row[vc] >= 0.0)) throw SchemaError("histogram entries must be >= 0");
    if (n >= p.size()) p.resize(n + 1, 0.0);
    p[n] += row[vc];
    total += row[vc];
  }
  if (!(total > 0.0)) throw SchemaError("histogram is empty");
  if (occurrences) {
    for (double& v : p) v /= total;
  }
  return p;
}

}  // namespace nvreadout::io
