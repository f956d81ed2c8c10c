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


#include "cli.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nvreadout/charge_dynamics.h"
#include "nvreadout/estimation.h"
#include "nvreadout/io.h"
#include "nvreadout/monte_carlo.h"
#include "nvreadout/photon_statistics.h"
#include "nvreadout/protocol_optimizer.h"
#include "nvreadout/readout_metrics.h"
#include "nvreadout/scc_model.h"

#ifndef NVREADOUT_VERSION
#define NVREADOUT_VERSION "0.0.0"
#endif

namespace nvreadout::cli {
namespace {

using io::CsvTable;
using io::Json;
using io::SchemaError;

constexpr double kNirValidMaxMw = 100.0;
constexpr double kVisibleValidMaxUw = 50.0;

struct Artifact {
  std::string content;
  std::optional<std::uint64_t> seed;
};

/// Options shared by every subcommand.
struct Common {
  std::string profile_path;
  std::string out_path;
  std::vector<std::string> input_files;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string Fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << h;
  return s.str();
}

io::DeviceProfile RequireProfile(Common& common) {
  if (common.profile_path.empty()) {
    throw SchemaError("this subcommand needs --profile");
  }
  common.input_files.push_back(common.profile_path);
  return io::LoadProfile(common.profile_path);
}

std::string CsvString(const CsvTable& t) {
  std::ostringstream s;
  io::WriteCsv(s, t);
  return s.str();
}

std::string CsvCell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::pair<double, double> ParseRange(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw SchemaError("range '" + text + "' must look like lo:hi");
  }
  try {
    std::size_t u1 = 0, u2 = 0;
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const double lo = std::stod(a, &u1);
    const double hi = std::stod(b, &u2);
    if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument("");
    return {lo, hi};
  } catch (const std::exception&) {
    throw SchemaError("range '" + text + "' must look like lo:hi");
  }
}

/// "0.1us" -> 0.1; the unit suffix is mandatory.
double ParseDurationUs(const std::string& text) {
  static const std::vector<std::pair<std::string, double>> kUnits = {
      {"ns", 1e-3}, {"us", 1.0}, {"ms", 1e3}, {"s", 1e6}};
  for (const auto& [suffix, scale] : kUnits) {
    if (text.size() > suffix.size() &&
        text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0) {
      const std::string number = text.substr(0, text.size() - suffix.size());
      try {
        std::size_t used = 0;
        const double v = std::stod(number, &used);
        if (used == number.size()) return v * scale;
      } catch (const std::exception&) {
      }
      break;
    }
  }
  throw SchemaError("duration '" + text + "' needs a unit suffix (ns, us, ms, s)");
}

std::vector<double> Linspace(double lo, double hi, int n) {
  if (n < 1) throw SchemaError("--points must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  }
  return v;
}

void WarnExtrapolation(std::ostream& err, double nir_max_mw, double green_uw) {
  if (nir_max_mw > kNirValidMaxMw) {
    err << "note: NIR powers above " << kNirValidMaxMw
        << " mW are extrapolated beyond the fitted range\n";
  }
  if (green_uw > kVisibleValidMaxUw) {
    err << "note: visible power above " << kVisibleValidMaxUw
        << " uW is extrapolated beyond the fitted range\n";
  }
}

// Subcommands -------------------------------------------------------------------

struct SteadyStateArgs {
  std::string range = "0:100";
  int points = 101;
  std::optional<double> green_uw;
};

Artifact SteadyStateCommand(Common& common, const SteadyStateArgs& a,
                            std::ostream& err) {
  const io::DeviceProfile p = RequireProfile(common);
  const auto [lo, hi] = ParseRange(a.range);
  if (lo < 0.0 || hi < lo) throw SchemaError("NIR range must satisfy 0 <= lo <= hi");
  const double green = a.green_uw.value_or(p.green_uw);
  WarnExtrapolation(err, hi, green);
  CsvTable t{{"r_mw", "p_minus"}, {}};
  for (double r : Linspace(lo, hi, a.points)) {
    t.rows.push_back({r, SteadyState(p.rate_model, green, r).p_minus()});
  }
  return {CsvString(t), std::nullopt};
}

struct NirArgs {
  std::string range = "0:100";
  int points = 101;
};

Artifact NirEquilibriumCommand(Common& common, const NirArgs& a,
                               std::ostream& err) {
  const io::DeviceProfile p = RequireProfile(common);
  const auto [lo, hi] = ParseRange(a.range);
  if (lo < 0.0 || hi < lo) throw SchemaError("NIR range must satisfy 0 <= lo <= hi");
  WarnExtrapolation(err, hi, 0.0);
  CsvTable t{{"r_mw", "p_minus"}, {}};
  for (double r : Linspace(lo, hi, a.points)) {
    t.rows.push_back({r, NirEquilibrium(p.nir_ionization, p.nir_recombination, r,
                                        p.destructivity, p.nir_interaction_ms)
                             .p_minus()});
  }
  return {CsvString(t), std::nullopt};
}

struct HistogramArgs {
  std::string convert;
  std::string to = "probability";
  std::int64_t shots = 0;
  int n_max = -1;
};

Artifact HistogramCommand(Common& common, const HistogramArgs& a) {
  const io::HistogramFormat format = a.to == "occurrences"
                                         ? io::HistogramFormat::kOccurrences
                                         : io::HistogramFormat::kProbability;
  if (!a.convert.empty()) {
    common.input_files.push_back(a.convert);
    const CsvTable in = io::ReadCsvFile(a.convert);
    if (format == io::HistogramFormat::kProbability) {
      const auto probs = io::ProbabilitiesFromCsv(in);
      CsvTable t{{"photon_count", "probability"}, {}};
      for (std::size_t n = 0; n < probs.size(); ++n) {
        t.rows.push_back({static_cast<double>(n), probs[n]});
      }
      return {CsvString(t), std::nullopt};
    }
    if (a.shots < 0) throw SchemaError("--shots must be >= 0");
    const PhotonHistogram h =
        io::HistogramFromCsv(in, static_cast<std::uint64_t>(a.shots));
    return {CsvString(io::HistogramToCsv(h, format)), std::nullopt};
  }
  if (format != io::HistogramFormat::kProbability) {
    throw SchemaError("the analytic histogram is a probability table");
  }
  const io::DeviceProfile p = RequireProfile(common);
  const std::int64_t n_max =
      a.n_max >= 0 ? a.n_max : PoissonTruncation(p.charge_readout.eta_minus);
  const auto pmf = MixturePmfTable(p.charge_readout, n_max);
  CsvTable t{{"photon_count", "probability"}, {}};
  for (std::size_t n = 0; n < pmf.size(); ++n) {
    t.rows.push_back({static_cast<double>(n), pmf[n]});
  }
  return {CsvString(t), std::nullopt};
}

struct FidelityArgs {
  double eta0 = 0.0;
  double eta_minus = 0.0;
  std::optional<int> threshold;
  std::string convention = "strictly-above";
};

Artifact FidelityCommand(const FidelityArgs& a) {
  const PoissonMixture m{a.eta0, a.eta_minus, 0.5};
  m.Validate();
  const ThresholdConvention conv = a.convention == "at-or-above"
                                       ? ThresholdConvention::kAtOrAbove
                                       : ThresholdConvention::kStrictlyAbove;
  const int threshold = a.threshold.value_or(OptimalThreshold(m, conv));
  const ChargeReadoutReport r = ChargeFidelity(m, threshold, conv);
  CsvTable t{{"threshold", "eps_zero", "eps_minus", "fidelity"},
             {{static_cast<double>(r.threshold), r.eps_zero, r.eps_minus,
               r.fidelity}}};
  return {CsvString(t), std::nullopt};
}

struct SccArgs {
  int cycles_max = 20;
  std::string delay_range;
  int points = 51;
  double lifetime_ns = 182.0;
};

Artifact SccCommand(Common& common, const SccArgs& a) {
  const io::DeviceProfile p = RequireProfile(common);
  if (!a.delay_range.empty()) {
    const auto [lo, hi] = ParseRange(a.delay_range);
    if (lo < 0.0 || hi < lo) throw SchemaError("delay range must satisfy 0 <= lo <= hi");
    // Shelved fraction of an NV- prepared in ms=+-1.
    const double shelved = p.scc.k45 * p.scc.p_exc();
    CsvTable t{{"delay_ns", "p_minus"}, {}};
    for (double d : Linspace(lo, hi, a.points)) {
      t.rows.push_back(
          {d, ShelfDelaySurvival(p.scc.p_sing, a.lifetime_ns, d, shelved)});
    }
    return {CsvString(t), std::nullopt};
  }
  if (a.cycles_max < 0) throw SchemaError("--cycles-max must be >= 0");
  CsvTable t{{"n", "beta0", "beta1"}, {}};
  for (int n = 0; n <= a.cycles_max; ++n) {
    const SccEfficiency e = SccEfficiencies(p.scc, n);
    t.rows.push_back({static_cast<double>(n), e.beta0, e.beta1});
  }
  return {CsvString(t), std::nullopt};
}

struct MetricsArgs {
  std::string records;
  std::optional<double> beta0;
  std::optional<double> beta1;
  double theta_rad = M_PI / 2;
};

std::optional<double> OptionalNumber(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) {
    throw SchemaError(std::string("field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

Artifact MetricsCommand(Common& common, const MetricsArgs& a) {
  if (a.records.empty()) {
    if (!a.beta0 || !a.beta1) {
      throw SchemaError("metrics needs --records or both --beta0 and --beta1");
    }
    const SccEfficiency e{*a.beta0, *a.beta1};
    CsvTable t{{"beta0", "beta1", "snr_threshold", "spin_fidelity", "sigma_r"},
               {{e.beta0, e.beta1, SnrThreshold(e).snr, SpinFidelity(e),
                 SpinReadoutNoise(e, a.theta_rad)}}};
    return {CsvString(t), std::nullopt};
  }
  common.input_files.push_back(a.records);
  const Json doc = io::ReadJsonFile(a.records);
  const Json& list = doc.is_object() && doc.contains("records") ? doc.at("records") : doc;
  if (!list.is_array()) throw SchemaError("records must be a JSON array");
  std::vector<TechniqueRecord> records;
  for (const Json& r : list) {
    TechniqueRecord t;
    if (!r.contains("study") || !r.at("study").is_string()) {
      throw SchemaError("each record needs a 'study' string");
    }
    t.study = r.at("study").get<std::string>();
    t.baseline_sigma_r = OptionalNumber(r, "baseline_sigma_r");
    t.baseline_fidelity = OptionalNumber(r, "baseline_fidelity");
    t.baseline_alpha0 = OptionalNumber(r, "baseline_alpha0");
    t.baseline_alpha1 = OptionalNumber(r, "baseline_alpha1");
    t.enhanced_sigma_r = OptionalNumber(r, "enhanced_sigma_r");
    t.enhanced_fidelity = OptionalNumber(r, "enhanced_fidelity");
    t.enhanced_beta0 = OptionalNumber(r, "enhanced_beta0");
    t.enhanced_beta1 = OptionalNumber(r, "enhanced_beta1");
    t.enhanced_snr = OptionalNumber(r, "enhanced_snr");
    t.optimal_beta0 = OptionalNumber(r, "optimal_beta0");
    t.optimal_beta1 = OptionalNumber(r, "optimal_beta1");
    t.saturation_kcps = OptionalNumber(r, "saturation_kcps");
    if (r.contains("requirements") && r.at("requirements").is_string()) {
      t.requirements = r.at("requirements").get<std::string>();
    }
    records.push_back(std::move(t));
  }
  std::ostringstream s;
  s << "study,single_shot_snr,snr_gain,optimal_snr,saturation_kcps,requirements\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? io::FormatNumber(*v) : std::string();
  };
  for (const ComparisonRow& row : CompareTechniques(records)) {
    s << CsvCell(row.study) << ',' << io::FormatNumber(row.single_shot_snr)
      << ',' << opt(row.snr_gain) << ',' << opt(row.optimal_snr) << ','
      << opt(row.saturation_kcps) << ',' << CsvCell(row.requirements) << '\n';
  }
  return {s.str(), std::nullopt};
}

struct SpeedupArgs {
  std::string range = "0.1us:10ms";
  int points = 41;
  std::string efficiency = "demonstrated";
};

Artifact SpeedupCommand(Common& common, const SpeedupArgs& a) {
  const io::DeviceProfile p = RequireProfile(common);
  const auto colon = a.range.find(':');
  if (colon == std::string::npos) {
    throw SchemaError("--tau-op-range must look like 0.1us:10ms");
  }
  const double lo = ParseDurationUs(a.range.substr(0, colon));
  const double hi = ParseDurationUs(a.range.substr(colon + 1));
  if (!(lo > 0.0) || hi < lo) throw SchemaError("--tau-op-range needs 0 < lo <= hi");
  const SccEfficiency eff =
      a.efficiency == "ideal" ? p.scc_ideal : p.scc_demonstrated;
  const auto grid = LogSpace(lo, hi, a.points);
  const auto rows = SpeedupSweep(eff, p.count_rate, p.pl, p.tau_init_us, grid);
  CsvTable t{{"tau_op_us", "tau_read_opt_us", "snr_ss", "total_time_s", "speedup"}, {}};
  for (const SpeedupRow& r : rows) {
    t.rows.push_back({r.tau_op_us, r.tau_read_opt_us, r.snr_ss, r.total_time_s,
                      r.speedup});
  }
  return {CsvString(t), std::nullopt};
}

struct SimulateArgs {
  std::string kind = "histogram";
  std::uint64_t seed = 0;
  std::int64_t shots = 10000;
  int threads = 0;
  std::string experiment;
  double gamma_ion_khz = 0.0;
  double gamma_rec_khz = 0.0;
  double pulse_ms = 1.0;
  double verify_flip = 0.0;
  std::optional<int> cycles;
};

Artifact SimulateCommand(Common& common, const SimulateArgs& a) {
  if (a.threads > 0) omp_set_num_threads(a.threads);
  const TrajectoryConfig config{a.seed, a.shots};
  config.Validate();
  if (a.kind == "histogram") {
    const io::DeviceProfile p = RequireProfile(common);
    const double window = p.charge_readout_ms;
    const ChargeReadoutSetup setup{window, p.charge_readout.eta_minus / window,
                                   p.charge_readout.eta_zero / window,
                                   a.gamma_ion_khz, a.gamma_rec_khz};
    const PhotonHistogram h = SimulateChargeHistogram(
        setup, ChargePopulation::FromMinus(p.charge_readout.weight_minus), config);
    return {CsvString(io::HistogramToCsv(h, io::HistogramFormat::kOccurrences)),
            a.seed};
  }
  if (a.kind == "rate") {
    const TransitionCounts c = SimulateRateExperiment(
        a.gamma_ion_khz, a.gamma_rec_khz, a.pulse_ms, config, a.verify_flip);
    const RateEstimate ion =
        RateFromTransitions(c.ionizations, c.trials_from_minus, a.pulse_ms);
    const RateEstimate rec =
        RateFromTransitions(c.recombinations, c.trials_from_zero, a.pulse_ms);
    CsvTable t{{"initial_minus", "trials", "transitions", "rate_khz", "error_khz"},
               {{1, static_cast<double>(c.trials_from_minus),
                 static_cast<double>(c.ionizations), ion.rate_khz, ion.error_khz},
                {0, static_cast<double>(c.trials_from_zero),
                 static_cast<double>(c.recombinations), rec.rate_khz,
                 rec.error_khz}}};
    return {CsvString(t), a.seed};
  }
  if (a.kind == "scc") {
    const io::DeviceProfile p = RequireProfile(common);
    const int n = a.cycles.value_or(p.scc_cycles);
    const SccSimulation s = SimulateScc(p.scc, n, config);
    CsvTable t{{"n", "beta0", "beta1", "beta0_error", "beta1_error"},
               {{static_cast<double>(n), s.beta0, s.beta1, s.beta0_error,
                 s.beta1_error}}};
    return {CsvString(t), a.seed};
  }
  if (a.kind == "sequence") {
    if (a.experiment.empty()) throw SchemaError("sequence simulation needs --experiment");
    common.input_files.push_back(a.experiment);
    const io::Experiment e = io::ExperimentFromJson(io::ReadJsonFile(a.experiment));
    const SequenceRecords r = RunSequence(e.segments, e.initial, config);
    CsvTable t{{"shot", "initial_minus", "final_minus"}, {}};
    for (int k = 0; k < r.recorded_segments; ++k) {
      t.header.push_back("photons_" + std::to_string(k));
    }
    for (std::int64_t i = 0; i < r.shots; ++i) {
      std::vector<double> row{static_cast<double>(i),
                              static_cast<double>(r.initial_minus[i]),
                              static_cast<double>(r.final_minus[i])};
      for (int k = 0; k < r.recorded_segments; ++k) {
        row.push_back(static_cast<double>(r.photon_count(i, k)));
      }
      t.rows.push_back(std::move(row));
    }
    return {CsvString(t), a.seed};
  }
  throw SchemaError("unknown simulation kind '" + a.kind + "'");
}

struct FitArgs {
  std::string kind;
  std::string data;
  std::string data_ms1;
  bool include_quadratic = false;
  std::int64_t shots = 0;
  double p_ion = 0.005;
};

std::optional<std::size_t> OptionalColumn(const CsvTable& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - t.header.begin());
}

std::vector<SccPoint> SccPointsFromCsv(const CsvTable& t, std::int64_t shots) {
  const std::size_t nc = t.column("cycles");
  const std::size_t vc = t.column("nv_minus");
  const auto ec = OptionalColumn(t, "error");
  const auto sc = OptionalColumn(t, "shots");
  std::vector<SccPoint> points;
  for (const auto& row : t.rows) {
    SccPoint p;
    p.cycles = static_cast<int>(row[nc]);
    p.nv_minus = row[vc];
    p.error = ec ? row[*ec] : 0.0;
    p.shots = sc ? static_cast<std::int64_t>(row[*sc]) : shots;
    points.push_back(p);
  }
  return points;
}

Artifact FitCommand(Common& common, const FitArgs& a) {
  if (a.data.empty()) throw SchemaError("fit needs --data");
  common.input_files.push_back(a.data);
  const CsvTable t = io::ReadCsvFile(a.data);
  FitResult fit;
  if (a.kind == "rate-polynomial") {
    std::vector<RatePoint> pts;
    const std::size_t r = t.column("r_mw"), y = t.column("rate_khz"),
                      e = t.column("error_khz");
    for (const auto& row : t.rows) pts.push_back({row[r], row[y], row[e]});
    fit = FitRatePolynomial(pts, a.include_quadratic);
  } else if (a.kind == "steady-state") {
    std::vector<SteadyStatePoint> pts;
    const std::size_t r = t.column("r_mw"), y = t.column("p_minus"),
                      e = t.column("error");
    for (const auto& row : t.rows) pts.push_back({row[r], row[y], row[e]});
    fit = FitSteadyState(pts);
  } else if (a.kind == "mixture") {
    fit = FitPoissonMixture(
        io::HistogramFromCsv(t, static_cast<std::uint64_t>(std::max<std::int64_t>(a.shots, 0))));
  } else if (a.kind == "exponential") {
    std::vector<DecayPoint> pts;
    const std::size_t d = t.column("delay_ns"), v = t.column("value");
    const auto e = OptionalColumn(t, "error");
    for (const auto& row : t.rows) pts.push_back({row[d], row[v], e ? row[*e] : 0.0});
    fit = FitExponential(pts);
  } else if (a.kind == "scc") {
    std::vector<SccPoint> ms1;
    if (!a.data_ms1.empty()) {
      common.input_files.push_back(a.data_ms1);
      ms1 = SccPointsFromCsv(io::ReadCsvFile(a.data_ms1), a.shots);
    }
    SccFitOptions options;
    options.p_ion = a.p_ion;
    fit = FitSccJoint(SccPointsFromCsv(t, a.shots), ms1, options);
  } else {
    throw SchemaError("unknown fit kind '" + a.kind + "'");
  }
  return {io::ToJson(fit).dump(2) + "\n", std::nullopt};
}

// Manifest and replay ---------------------------------------------------------------

Json Manifest(const std::vector<std::string>& args, const Common& common,
              const Artifact& artifact) {
  Json inputs = Json::array();
  for (const std::string& path : common.input_files) {
    inputs.push_back({{"path", path}, {"fnv1a64", Fnv1a64(ReadFile(path))}});
  }
  return {{"schema_version", io::kSchemaVersion},
          {"tool", "nvreadout"},
          {"version", NVREADOUT_VERSION},
          {"argv", args},
          {"seed", artifact.seed ? Json(*artifact.seed) : Json(nullptr)},
          {"inputs", inputs},
          {"artifact", {{"path", common.out_path},
                        {"fnv1a64", Fnv1a64(artifact.content)}}}};
}

std::vector<std::string> ReplayArgs(const std::string& manifest_path) {
  const Json m = io::ReadJsonFile(manifest_path);
  if (!m.contains("argv") || !m.at("argv").is_array()) {
    throw SchemaError("manifest has no argv");
  }
  if (m.contains("inputs")) {
    for (const Json& in : m.at("inputs")) {
      const std::string path = in.at("path").get<std::string>();
      if (Fnv1a64(ReadFile(path)) != in.at("fnv1a64").get<std::string>()) {
        throw SchemaError("input '" + path + "' changed since the recorded run");
      }
    }
  }
  std::vector<std::string> args;
  const auto argv = m.at("argv").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (argv[i] == "--out") {
      ++i;
      continue;
    }
    if (argv[i].rfind("--out=", 0) == 0) continue;
    args.push_back(argv[i]);
  }
  return args;
}

std::string OneLine(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Charge and spin readout modeling for NV centers", "nvreadout"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NVREADOUT_VERSION);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--profile", common.profile_path, "Device profile JSON")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_path,
                    "Write the artifact here and a manifest next to it");
  };

  SteadyStateArgs ss;
  auto* ss_cmd = app.add_subcommand("steady-state", "p_minus versus NIR power (CSV r_mw,p_minus)");
  add_common(ss_cmd);
  ss_cmd->add_option("--nir-range-mw", ss.range, "lo:hi in mW");
  ss_cmd->add_option("--points", ss.points);
  ss_cmd->add_option("--green-uw", ss.green_uw, "Override the profile's visible power");

  NirArgs nir;
  auto* nir_cmd = app.add_subcommand("nir-equilibrium", "NIR-only cycle equilibrium (CSV r_mw,p_minus)");
  add_common(nir_cmd);
  nir_cmd->add_option("--nir-range-mw", nir.range, "lo:hi in mW");
  nir_cmd->add_option("--points", nir.points);

  HistogramArgs hist;
  auto* hist_cmd = app.add_subcommand("histogram", "Analytic photon-count pmf or format conversion");
  add_common(hist_cmd);
  hist_cmd->add_option("--convert", hist.convert, "Histogram CSV to convert")
      ->check(CLI::ExistingFile);
  hist_cmd->add_option("--to", hist.to)->check(CLI::IsMember({"probability", "occurrences"}));
  hist_cmd->add_option("--shots", hist.shots, "Total shots for probability -> occurrences");
  hist_cmd->add_option("--n-max", hist.n_max, "Largest photon count in the pmf table");

  FidelityArgs fid;
  auto* fid_cmd = app.add_subcommand("fidelity", "Threshold charge-readout fidelity");
  add_common(fid_cmd);
  fid_cmd->add_option("--eta0", fid.eta0, "Mean NV0 counts (photons)")->required();
  fid_cmd->add_option("--eta-minus", fid.eta_minus, "Mean NV- counts (photons)")->required();
  fid_cmd->add_option("--threshold", fid.threshold, "Photon threshold; optimal if omitted");
  fid_cmd->add_option("--convention", fid.convention)
      ->check(CLI::IsMember({"strictly-above", "at-or-above"}));

  SccArgs scc;
  auto* scc_cmd = app.add_subcommand("scc", "SCC efficiencies versus repeats or shelf delay");
  add_common(scc_cmd);
  scc_cmd->add_option("--cycles-max", scc.cycles_max);
  scc_cmd->add_option("--delay-range-ns", scc.delay_range, "lo:hi in ns (switches to delay mode)");
  scc_cmd->add_option("--points", scc.points);
  scc_cmd->add_option("--singlet-lifetime-ns", scc.lifetime_ns);

  MetricsArgs met;
  auto* met_cmd = app.add_subcommand("metrics", "Readout figures of merit and technique comparison");
  add_common(met_cmd);
  met_cmd->add_option("--records", met.records, "JSON list of technique records")
      ->check(CLI::ExistingFile);
  met_cmd->add_option("--beta0", met.beta0);
  met_cmd->add_option("--beta1", met.beta1);
  met_cmd->add_option("--theta-rad", met.theta_rad);

  SpeedupArgs sp;
  auto* sp_cmd = app.add_subcommand("speedup", "SCC versus PL integration-time speedup");
  add_common(sp_cmd);
  sp_cmd->add_option("--tau-op-range", sp.range, "lo:hi with unit suffixes, e.g. 0.1us:10ms");
  sp_cmd->add_option("--points", sp.points);
  sp_cmd->add_option("--efficiency", sp.efficiency)
      ->check(CLI::IsMember({"demonstrated", "ideal"}));

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Seeded Monte Carlo experiments");
  add_common(sim_cmd);
  sim_cmd->add_option("--kind", sim.kind)
      ->check(CLI::IsMember({"histogram", "rate", "scc", "sequence"}));
  sim_cmd->add_option("--seed", sim.seed)->required();
  sim_cmd->add_option("--shots", sim.shots);
  sim_cmd->add_option("--threads", sim.threads, "OpenMP threads (0 = default)");
  sim_cmd->add_option("--experiment", sim.experiment, "Pulse-sequence JSON")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--gamma-ion-khz", sim.gamma_ion_khz);
  sim_cmd->add_option("--gamma-rec-khz", sim.gamma_rec_khz);
  sim_cmd->add_option("--pulse-ms", sim.pulse_ms);
  sim_cmd->add_option("--verify-flip-prob", sim.verify_flip);
  sim_cmd->add_option("--cycles", sim.cycles);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a CSV dataset; emits FitResult JSON");
  add_common(fit_cmd);
  fit_cmd->add_option("--kind", fit.kind)
      ->required()
      ->check(CLI::IsMember({"rate-polynomial", "steady-state", "mixture",
                             "exponential", "scc"}));
  fit_cmd->add_option("--data", fit.data)->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--data-ms1", fit.data_ms1)->check(CLI::ExistingFile);
  fit_cmd->add_flag("--include-quadratic", fit.include_quadratic);
  fit_cmd->add_option("--shots", fit.shots, "Shots per point or histogram total");
  fit_cmd->add_option("--p-ion", fit.p_ion);

  std::string manifest;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << NVREADOUT_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: input: " << OneLine(e.what()) << "\n";
    return kExitInputError;
  }

  try {
    if (replay_cmd->parsed()) {
      return Run(ReplayArgs(manifest), out, err);
    }
    Artifact artifact;
    if (ss_cmd->parsed()) artifact = SteadyStateCommand(common, ss, err);
    else if (nir_cmd->parsed()) artifact = NirEquilibriumCommand(common, nir, err);
    else if (hist_cmd->parsed()) artifact = HistogramCommand(common, hist);
    else if (fid_cmd->parsed()) artifact = FidelityCommand(fid);
    else if (scc_cmd->parsed()) artifact = SccCommand(common, scc);
    else if (met_cmd->parsed()) artifact = MetricsCommand(common, met);
    else if (sp_cmd->parsed()) artifact = SpeedupCommand(common, sp);
    else if (sim_cmd->parsed()) artifact = SimulateCommand(common, sim);
    else if (fit_cmd->parsed()) artifact = FitCommand(common, fit);

    if (common.out_path.empty()) {
      out << artifact.content;
    } else {
      std::ofstream file(common.out_path, std::ios::binary);
      if (!file) throw SchemaError("cannot write '" + common.out_path + "'");
      file << artifact.content;
      std::ofstream mf(common.out_path + ".manifest.json", std::ios::binary);
      mf << Manifest(args, common, artifact).dump(2) << "\n";
    }
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    err << "error: input: " << OneLine(e.what()) << "\n";
    return kExitInputError;
  } catch (const std::out_of_range& e) {
    err << "error: input: " << OneLine(e.what()) << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: numerical: " << OneLine(e.what()) << "\n";
    return kExitNumericalFailure;
  }
}

}  // namespace nvreadout::cli
