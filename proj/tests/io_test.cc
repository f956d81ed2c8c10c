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

#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

namespace nvreadout::io {
namespace {

std::string ProfilePath() { return std::string(NVREADOUT_SOURCE_DIR) + "/profiles/paper.json"; }

TEST(Quantity, RoundTripAndUnitCheck) {
  const Json j = {{"x", Quantity(2.5, "mW")}};
  EXPECT_DOUBLE_EQ(ReadQuantity(j, "x", "mW"), 2.5);
  EXPECT_THROW(ReadQuantity(j, "x", "uW"), SchemaError);
  EXPECT_THROW(ReadQuantity(j, "missing", "mW"), SchemaError);
  const Json bare = {{"x", 2.5}};
  EXPECT_THROW(ReadQuantity(bare, "x", "mW"), SchemaError);
}

TEST(RoundTrip, ModelTypes) {
  MultiphotonRateModel m{1.0, 2.0, 3.0, 4.0, 5.0};
  const MultiphotonRateModel m2 = RateModelFromJson(ToJson(m));
  EXPECT_EQ(m2.c12, 3.0);
  EXPECT_EQ(m2.d11, 5.0);

  const NirRatePolynomial p{5.1e-7, 8.4e-5, 1e-7};
  const NirRatePolynomial p2 = NirPolynomialFromJson(ToJson(p));
  EXPECT_EQ(p2.a, p.a);
  EXPECT_EQ(p2.b, p.b);
  EXPECT_EQ(p2.c, p.c);

  const PoissonMixture mix{0.45, 10.0, 0.7};
  const PoissonMixture mix2 = MixtureFromJson(ToJson(mix));
  EXPECT_EQ(mix2.eta_zero, 0.45);
  EXPECT_EQ(mix2.weight_minus, 0.7);

  SccParams s;
  s.k45 = 0.25;
  s.k51_over_k52 = 2.26;
  const SccParams s2 = SccParamsFromJson(ToJson(s));
  EXPECT_EQ(s2.k45, 0.25);
  EXPECT_EQ(s2.k51_over_k52, 2.26);

  const PulseSegment seg{3.0, 0.1, 0.2, 3.37, 0.15, true};
  const PulseSegment seg2 = SegmentFromJson(ToJson(seg));
  EXPECT_EQ(seg2.duration_ms, 3.0);
  EXPECT_TRUE(seg2.record_photons);
}

TEST(RoundTrip, InvalidValuesRejected) {
  Json j = ToJson(PoissonMixture{0.45, 10.0, 0.7});
  j["weight_minus"]["value"] = 1.5;
  EXPECT_THROW(MixtureFromJson(j), std::invalid_argument);
}

TEST(Profile, ReferenceProfileLoadsAndRoundTrips) {
  const DeviceProfile p = LoadProfile(ProfilePath());
  EXPECT_NEAR(p.charge_readout.eta_zero, 0.45, 1e-12);
  EXPECT_NEAR(p.charge_readout.eta_minus, 10.0, 1e-12);
  EXPECT_NEAR(p.scc.k45, 0.25, 1e-12);
  EXPECT_NEAR(p.nir_ionization.a, 4.7e-7, 1e-20);
  EXPECT_EQ(p.scc_cycles, 10);
  const DeviceProfile q = ProfileFromJson(ToJson(p));
  EXPECT_EQ(q.scc.k51_over_k52, p.scc.k51_over_k52);
  EXPECT_EQ(q.count_rate.bg_slope_kcps, p.count_rate.bg_slope_kcps);
  EXPECT_EQ(q.destructivity(1, 0), p.destructivity(1, 0));
}

TEST(Profile, WrongVersionAndUnitsFail) {
  Json j = ToJson(LoadProfile(ProfilePath()));
  Json bad_version = j;
  bad_version["schema_version"] = 2;
  EXPECT_THROW(ProfileFromJson(bad_version), SchemaError);
  EXPECT_THROW(LoadProfile("/nonexistent/profile.json"), std::invalid_argument);
}

TEST(Experiment, ExampleFileParses) {
  const Experiment e = ExperimentFromJson(
      ReadJsonFile(std::string(NVREADOUT_SOURCE_DIR) + "/profiles/charge_readout_experiment.json"));
  ASSERT_EQ(e.segments.size(), 2u);
  EXPECT_DOUBLE_EQ(e.initial.p_minus(), 0.7);
  EXPECT_DOUBLE_EQ(e.segments[1].duration_ms, 3.0);
  const Experiment again = ExperimentFromJson(ToJson(e));
  EXPECT_EQ(again.segments.size(), 2u);
}

TEST(FitJson, NonFiniteBecomesNull) {
  FitResult fit;
  fit.names = {"a", "b"};
  fit.units = {"1", "ns"};
  fit.values = Eigen::Vector2d(1.0, 2.0);
  fit.covariance = Eigen::Matrix2d::Zero();
  fit.covariance(1, 1) = std::numeric_limits<double>::infinity();
  fit.ci65 = Eigen::Vector2d(0.0, std::numeric_limits<double>::infinity());
  fit.ci95 = fit.ci65;
  const Json j = ToJson(fit);
  const std::string text = j.dump();
  EXPECT_EQ(text.find("inf"), std::string::npos);
  EXPECT_NE(text.find("null"), std::string::npos);
}

TEST(Csv, FormatAndRoundTrip) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(FormatNumber(std::numeric_limits<double>::infinity()), "inf");
  CsvTable t{{"x", "y"}, {{1.0, 2.5}, {3.0, 1e-9}}};
  std::ostringstream out;
  WriteCsv(out, t);
  EXPECT_EQ(out.str(), "x,y\n1,2.5\n3,1e-09\n");
  std::istringstream in(out.str());
  const CsvTable back = ReadCsv(in);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("y"), 1u);
  EXPECT_THROW(back.column("z"), SchemaError);
}

TEST(Csv, MalformedRejected) {
  std::istringstream ragged("a,b\n1,2\n3\n");
  EXPECT_THROW(ReadCsv(ragged), SchemaError);
  std::istringstream text("a\nfoo\n");
  EXPECT_THROW(ReadCsv(text), SchemaError);
}

TEST(Histogram, OccurrencesProbabilityConversion) {
  PhotonHistogram h;
  h.occurrences = {5, 3, 0, 2};
  const CsvTable occ = HistogramToCsv(h, HistogramFormat::kOccurrences);
  const CsvTable prob = HistogramToCsv(h, HistogramFormat::kProbability);
  EXPECT_EQ(HistogramFromCsv(occ).occurrences, h.occurrences);
  EXPECT_EQ(HistogramFromCsv(prob, 10).occurrences, h.occurrences);
  const auto p = ProbabilitiesFromCsv(prob);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[3], 0.2);
  EXPECT_EQ(ProbabilitiesFromCsv(occ), p);
  EXPECT_THROW(HistogramFromCsv(prob), std::invalid_argument);
}

}  // namespace
}  // namespace nvreadout::io
