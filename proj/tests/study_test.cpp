#include <sstream>

#include <gtest/gtest.h>

#include "outlook/eval.hpp"
#include "outlook/momap.hpp"
#include "outlook/synth.hpp"
#include "test_support.hpp"

using namespace outlook;

TEST(ComplexityStudy, LargeSampleErrorIsSmall) {
  const std::vector<int> sizes{1000000};
  const auto curve = sample_complexity_study(default_study_spec(), default_study_transform(), sizes, 1, 2, 0, 4);
  EXPECT_LE(curve.median_max_errors()[0], 0.05);
}

TEST(ComplexityStudy, ErrorShrinksAlongTheGrid) {
  const std::vector<int> sizes{50, 200, 800, 3200};
  const auto curve = sample_complexity_study(default_study_spec(), default_study_transform(), sizes, 20, 2, 1, 4);
  const auto med = curve.median_max_errors();
  ASSERT_EQ(med.size(), 4u);
  EXPECT_LT(med[3], med[0]);
  const double slope = curve.loglog_slope();
  EXPECT_GE(slope, -0.7);
  EXPECT_LE(slope, -0.3);
  ASSERT_EQ(curve.rotation_errors[0].size(), 20u);
  EXPECT_EQ(curve.rotation_errors[0][0].size(), 2u);
}

TEST(ComplexityStudy, DeterministicAcrossThreads) {
  const std::vector<int> sizes{40, 80};
  const auto a = sample_complexity_study(default_study_spec(), default_study_transform(), sizes, 5, 2, 3, 1);
  const auto b = sample_complexity_study(default_study_spec(), default_study_transform(), sizes, 5, 2, 3, 7);
  std::ostringstream ca, cb;
  write_curve_csv(ca, a);
  write_curve_csv(cb, b);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ca.str().substr(0, 22), "size,seed,class,value\n");
}

TEST(ComplexityStudy, RejectsDegenerateSpectrumAndBadGrid) {
  auto spec = default_study_spec();
  spec.components[0].cov = Matrix::Identity(3, 3) * 0.1;
  const std::vector<int> sizes{50, 100};
  EXPECT_THROW(sample_complexity_study(spec, default_study_transform(), sizes, 2, 2, 0), InputError);
  const std::vector<int> decreasing{100, 50};
  EXPECT_THROW(sample_complexity_study(default_study_spec(), default_study_transform(), decreasing, 2, 2, 0),
               InputError);
}

TEST(DefaultStudyProblem, IsWellConditioned) {
  const auto spec = default_study_spec();
  spec.validate();
  const auto& t = default_study_transform();
  EXPECT_LT((t.rotation.transpose() * t.rotation - Matrix::Identity(3, 3)).norm(), 1e-14);
  std::vector<ClassMoments> target, source;
  const auto src = transform_spec(spec, t);
  for (int i = 0; i < 2; ++i) {
    target.push_back({spec.components[static_cast<std::size_t>(i)].mean, spec.components[static_cast<std::size_t>(i)].cov, 0});
    source.push_back({src.components[static_cast<std::size_t>(i)].mean, src.components[static_cast<std::size_t>(i)].cov, 0});
  }
  const auto m = fit_from_moments(target, source, 3);
  for (const auto& c : m.classes) {
    EXPECT_FALSE(c.near_degenerate);
    EXPECT_LT((c.rotation - t.rotation.transpose()).norm(), 1e-8);
  }
}

TEST(RobustCheck, BoundHoldsAndIsAttained) {
  RobustCheckConfig cfg;
  cfg.instances = 8;
  cfg.samples = 5000;
  cfg.threads = 4;
  const auto r = robust_additivity_check(cfg);
  EXPECT_EQ(r.evaluated, 24);
  EXPECT_LE(r.max_sampled_excess, 1e-9);
  EXPECT_LE(r.max_analytic_gap, 1e-9);
}

TEST(RobustCheck, RejectsBadConfig) {
  RobustCheckConfig cfg;
  cfg.instances = 0;
  EXPECT_THROW(robust_additivity_check(cfg), InputError);
  cfg.instances = 1;
  cfg.rho_values = {-1.0};
  EXPECT_THROW(robust_additivity_check(cfg), InputError);
}
