#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "spinsim/error.hpp"
#include "spinsim/field_schedule.hpp"

using namespace spinsim;

namespace {

template <typename F>
void expect_kind(ErrorKind kind, F&& f) {
  try {
    f();
    FAIL() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

void expect_field(FieldVector b, double bx, double by, double bz, double tol = 1e-15) {
  EXPECT_NEAR(b.bx, bx, tol);
  EXPECT_NEAR(b.by, by, tol);
  EXPECT_NEAR(b.bz, bz, tol);
}

}  // namespace

TEST(SmoothReversal, EndpointsAndMidpoint) {
  const auto s = make_smooth_reversal(0.2, 0.05, 2e-3, 1e-3);
  expect_field(field_at(s, 0.0), 0.0, 0.0, 0.2);
  expect_field(field_at(s, 1e-3), 0.05, 0.0, 0.0, 1e-15);
  expect_field(field_at(s, 2e-3), 0.0, 0.0, -0.2);
  expect_field(field_at(s, -5e-3), 0.0, 0.0, 0.2);
  expect_field(field_at(s, 7e-3), 0.0, 0.0, -0.2);
  EXPECT_EQ(s.kind(), ScheduleKind::kSmoothReversal);
  ASSERT_TRUE(s.active_interval());
  EXPECT_DOUBLE_EQ(s.active_interval()->first, 0.0);
  EXPECT_DOUBLE_EQ(s.active_interval()->second, 2e-3);
}

TEST(SmoothReversal, MinimumFieldMatchesDenseSampling) {
  for (double b_min : {0.2, 0.05, 0.02, 0.004}) {
    const auto s = make_smooth_reversal(0.2, b_min, 2e-3, 1e-3);
    const double dense = oracle::dense_min_field(s, 0.0, 2e-3);
    EXPECT_NEAR(min_field_magnitude(s), dense, 1e-9 * dense) << b_min;
    EXPECT_NEAR(min_field_magnitude(s), b_min, 1e-12);
    EXPECT_NEAR(min_zeeman_gap(s, kGammaF2HzPerGauss), kGammaF2HzPerGauss * b_min, 1e-6);
  }
}

TEST(SmoothReversal, RejectsNonPositiveParameters) {
  expect_kind(ErrorKind::kInvalidArgument, [] { make_smooth_reversal(0.2, 0.0, 2e-3, 0.0); });
  expect_kind(ErrorKind::kInvalidArgument, [] { make_smooth_reversal(0.2, -0.1, 2e-3, 0.0); });
  expect_kind(ErrorKind::kInvalidArgument, [] { make_smooth_reversal(0.0, 0.1, 2e-3, 0.0); });
  expect_kind(ErrorKind::kInvalidArgument, [] { make_smooth_reversal(0.2, 0.1, 0.0, 0.0); });
}

TEST(SuddenReversal, RampShape) {
  const auto s = make_sudden_reversal(0.2, 1e-3, 1e-3, 2e-6);
  expect_field(field_at(s, 0.0), 1e-3, 0.0, 0.2);
  expect_field(field_at(s, 1e-3), 1e-3, 0.0, 0.0, 1e-12);
  expect_field(field_at(s, 2e-3), 1e-3, 0.0, -0.2);
  expect_field(field_at(s, 1e-3 - 0.5e-6), 1e-3, 0.0, 0.1, 1e-9);
  EXPECT_NEAR(min_field_magnitude(s), 1e-3, 1e-12);
  expect_kind(ErrorKind::kInvalidArgument, [] { make_sudden_reversal(0.2, 0.0, -1e-3); });
  expect_kind(ErrorKind::kInvalidArgument, [] { make_sudden_reversal(0.2, 0.0, 1e-3, 0.0); });
}

TEST(ConstantSchedule, Basics) {
  const auto s = make_constant({0.0, 0.0, 0.2});
  expect_field(field_at(s, 123.0), 0.0, 0.0, 0.2);
  EXPECT_FALSE(s.active_interval());
  EXPECT_DOUBLE_EQ(min_field_magnitude(s), 0.2);
  expect_kind(ErrorKind::kNoReversalWindow, [&] { adiabaticity_ratio(s, kGammaF1HzPerGauss); });
}

TEST(SampledTrace, ParseAndInterpolate) {
  std::istringstream in("t_s,bx_g,by_g,bz_g\n0,0,0,0.2\n1e-3,0.1,0,0\n2e-3,0,0,-0.2\n");
  const auto s = parse_trace_csv(in);
  EXPECT_EQ(s.kind(), ScheduleKind::kSampledTrace);
  EXPECT_DOUBLE_EQ(s.t_start(), 0.0);
  EXPECT_DOUBLE_EQ(s.t_end(), 2e-3);
  expect_field(field_at(s, 0.5e-3), 0.05, 0.0, 0.1);
  expect_kind(ErrorKind::kOutOfDomain, [&] { field_at(s, 3e-3); });
  expect_kind(ErrorKind::kOutOfDomain, [&] { field_at(s, -1e-9); });
  // Linear bz from +0.2 to -0.2 over 2 ms: the 10-90 % span is 1.6 ms.
  ASSERT_TRUE(s.reversal_time_scale());
  EXPECT_NEAR(*s.reversal_time_scale(), 2e-3, 1e-12);
}

TEST(SampledTrace, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_trace_csv(in);
  };
  expect_kind(ErrorKind::kIo, [&] { parse(""); });
  expect_kind(ErrorKind::kIo, [&] { parse("t,bx,by,bz\n0,0,0,1\n1,0,0,1\n"); });
  expect_kind(ErrorKind::kIo, [&] { parse("t_s,bx_g,by_g,bz_g\n0,0,0,1\n"); });
  expect_kind(ErrorKind::kIo, [&] { parse("t_s,bx_g,by_g,bz_g\n0,0,0,1\n0,0,0,1\n"); });
  expect_kind(ErrorKind::kIo, [&] { parse("t_s,bx_g,by_g,bz_g\n0,0,0,1\n1,0,x,1\n"); });
  expect_kind(ErrorKind::kIo, [] { load_trace_csv("/nonexistent/trace.csv"); });
}

TEST(SampledTrace, NoReversalWithoutSignChange) {
  const auto s = make_sampled_trace({{0.0, {0, 0, 0.2}}, {1e-3, {0, 0, 0.1}}});
  EXPECT_FALSE(s.reversal_time_scale());
}

TEST(Adiabaticity, ReferenceGapValues) {
  for (double gap : {140e3, 14e3, 2.8e3}) {
    EXPECT_EQ(classify_adiabaticity(2e-3, gap).classification, Adiabaticity::kAdiabatic) << gap;
  }
  EXPECT_EQ(classify_adiabaticity(2e-6, 700.0).classification, Adiabaticity::kSudden);
  const auto r = classify_adiabaticity(1.0, 1.0);
  EXPECT_NEAR(r.ratio, 2.0 * kPi, 1e-15);
  EXPECT_EQ(r.classification, Adiabaticity::kMarginal);
}

TEST(Adiabaticity, FromSchedules) {
  const auto smooth = make_smooth_reversal(0.2, 0.2, 2e-3, 1e-3);
  const auto a = adiabaticity_ratio(smooth, kGammaF1HzPerGauss);
  EXPECT_DOUBLE_EQ(a.delta_tau, 2e-3);
  EXPECT_NEAR(a.min_gap_hz, 0.2 * std::abs(kGammaF1HzPerGauss), 1e-6);
  EXPECT_EQ(a.classification, Adiabaticity::kAdiabatic);
  const auto sudden = make_sudden_reversal(0.2, 0.0, 1e-3, 2e-6);
  EXPECT_EQ(adiabaticity_ratio(sudden, kGammaF2HzPerGauss).classification, Adiabaticity::kSudden);
}

TEST(Perturbation, ZeroAmplitudeIsIdentity) {
  const auto s = make_smooth_reversal(0.2, 0.2, 2e-3, 1e-3);
  const auto p = perturb_schedule(s, 42, 0.0, 3);
  EXPECT_EQ(p.kind(), ScheduleKind::kSmoothReversal);
  for (double t : {0.0, 0.3e-3, 1e-3, 1.7e-3}) {
    EXPECT_EQ(field_at(p, t), field_at(s, t));
  }
}

TEST(Perturbation, SeededAndVanishingAtWindowEdges) {
  const auto s = make_smooth_reversal(0.2, 0.2, 2e-3, 1e-3);
  const auto a = perturb_schedule(s, 7, 0.04, 3);
  const auto b = perturb_schedule(s, 7, 0.04, 3);
  const auto c = perturb_schedule(s, 8, 0.04, 3);
  EXPECT_EQ(a.kind(), ScheduleKind::kPerturbed);
  bool differs = false;
  for (int i = 0; i <= 50; ++i) {
    const double t = 2e-3 * i / 50.0;
    EXPECT_EQ(field_at(a, t), field_at(b, t));
    differs = differs || !(field_at(a, t) == field_at(c, t));
  }
  EXPECT_TRUE(differs);
  expect_field(field_at(a, 0.0), 0.0, 0.0, 0.2);
  expect_field(field_at(a, 2e-3), 0.0, 0.0, -0.2);
  const auto& params = std::get<PerturbedParams>(a.params());
  EXPECT_EQ(params.modes.size(), 9u);
  EXPECT_GE(params.min_field, 0.1 * 0.2);
  EXPECT_NEAR(params.min_field, oracle::dense_min_field(a, 0.0, 2e-3, 200000), 1e-7);
}

TEST(Perturbation, AcceptedPathsStayGapped) {
  const auto s = make_smooth_reversal(0.2, 0.004, 2e-3, 1e-3);
  for (double amplitude : {0.2 * 0.004, 0.2, 5.0}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      try {
        const auto p = perturb_schedule(s, seed, amplitude, 3);
        EXPECT_GE(oracle::dense_min_field(p, 0.0, 2e-3, 100000), 0.1 * 0.004);
      } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kGapClosed);
      }
    }
  }
  expect_kind(ErrorKind::kInvalidArgument,
              [] { perturb_schedule(make_constant({0, 0, 0.2}), 1, 0.01, 3); });
}

TEST(FieldSchedule, BreakpointsMarkKinks) {
  EXPECT_TRUE(make_constant({0, 0, 0.2}).breakpoints().empty());
  const auto smooth = make_smooth_reversal(0.2, 0.02, 2e-3, 1.1e-3).restricted(0.0, 2.2e-3);
  const auto sb = smooth.breakpoints();
  ASSERT_EQ(sb.size(), 2u);
  EXPECT_DOUBLE_EQ(sb[0], 0.1e-3);
  EXPECT_DOUBLE_EQ(sb[1], 2.1e-3);
  const auto sudden = make_sudden_reversal(0.2, 5e-4, 1e-3, 2e-6).restricted(0.0, 1e-3);
  const auto ub = sudden.breakpoints();
  ASSERT_EQ(ub.size(), 2u);
  EXPECT_NEAR(ub[0], 499e-6, 1e-18);
  EXPECT_NEAR(ub[1], 501e-6, 1e-18);
  const auto trace = make_sampled_trace({{0.0, {0, 0, 0.2}}, {1e-4, {0, 0, 0.1}}, {2e-4, {0, 0, -0.2}}});
  EXPECT_EQ(trace.breakpoints(), std::vector<double>{1e-4});
}
