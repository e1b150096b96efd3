#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fovcalib/model.hpp"

namespace fovcalib {
namespace {

constexpr RadialModel kFisheye[] = {RadialModel::Stereographic, RadialModel::Equidistance,
                                    RadialModel::EquisolidAngle, RadialModel::Orthographic};

TEST(RadialForward, IdentityAtZeroOmega) {
  EXPECT_EQ(radial_forward(RadialModel::Equidistance, 0.0, 350.0), 350.0);
  for (auto m : kAllModels) EXPECT_EQ(radial_forward(m, 0.0, 123.25), 123.25);
}

TEST(RadialForward, EquidistanceArctanOne) {
  EXPECT_NEAR(radial_forward(RadialModel::Equidistance, 1.0 / 600.0, 600.0), 600.0 * kPi / 4.0, 1e-9);
  EXPECT_NEAR(radial_forward(RadialModel::Equidistance, 1.0 / 600.0, 600.0), 471.2389, 1e-4);
}

TEST(RadialForward, OtherLawsMatchHighPrecisionOracle) {
  // 2f sin(theta/2), 2f tan(theta/2), f sin(theta) with theta = atan(1), f = 600 (mpmath, 40 digits).
  EXPECT_NEAR(radial_forward(RadialModel::EquisolidAngle, 1.0 / 600.0, 600.0), 459.22011883810773, 1e-9);
  EXPECT_NEAR(radial_forward(RadialModel::Stereographic, 1.0 / 600.0, 600.0), 497.05627484771406, 1e-9);
  EXPECT_NEAR(radial_forward(RadialModel::Orthographic, 1.0 / 600.0, 600.0), 424.26406871192851, 1e-9);
}

TEST(RadialForward, PerspectiveIsIdentity) {
  EXPECT_EQ(radial_forward(RadialModel::Perspective, 0.01, 1000.0), 1000.0);
  EXPECT_EQ(radial_inverse(RadialModel::Perspective, 0.01, 1000.0), 1000.0);
}

TEST(RadialForward, RejectsNegativeOrNonFiniteInput) {
  EXPECT_THROW(radial_forward(RadialModel::Equidistance, 1e-3, -1.0), DomainError);
  EXPECT_THROW(radial_forward(RadialModel::Equidistance, -1e-3, 1.0), DomainError);
  EXPECT_THROW(radial_forward(RadialModel::Orthographic, 1e-3, INFINITY), DomainError);
}

TEST(RadialInverse, Examples) {
  EXPECT_EQ(radial_inverse(RadialModel::Equidistance, 0.0, 350.0), 350.0);
  EXPECT_NEAR(radial_inverse(RadialModel::Equidistance, 1.0 / 600.0, 600.0 * kPi / 4.0), 600.0, 1e-9);
  // tan(0.001239 * 640) / 0.001239 (mpmath).
  EXPECT_NEAR(radial_inverse(RadialModel::Equidistance, 0.001239, 640.0), 819.40209847682541, 1e-8);
}

TEST(RadialInverse, DomainViolation) {
  const double w = 1.0 / 600.0;
  EXPECT_THROW(radial_inverse(RadialModel::Equidistance, w, kPi / 2.0 / w), DomainError);
  EXPECT_THROW(radial_inverse(RadialModel::Equidistance, w, 2000.0), DomainError);
  EXPECT_THROW(radial_inverse(RadialModel::Orthographic, w, 600.0), DomainError);
  EXPECT_THROW(radial_inverse(RadialModel::EquisolidAngle, w, 600.0 * std::sqrt(2.0)), DomainError);
  EXPECT_THROW(radial_inverse(RadialModel::Stereographic, w, 1200.0), DomainError);
  EXPECT_NO_THROW(radial_inverse(RadialModel::Stereographic, w, 1199.0));
}

TEST(RadialModelProperties, SmallOmegaAgreesWithSeries) {
  // r - omega^2 r^3 / 3 + ... for atan; every law shares the identity limit.
  const double w = 1e-12;
  for (double r : {0.0, 1.0, 500.0, 1e4}) {
    const double series = r - w * w * r * r * r / 3.0;
    EXPECT_NEAR(radial_forward(RadialModel::Equidistance, w, r), series, 1e-9);
    for (auto m : kAllModels) EXPECT_NEAR(radial_forward(m, w, r), r, 1e-9);
  }
  EXPECT_EQ(radial_forward(RadialModel::Equidistance, 5e-13, 1e4), 1e4);
}

TEST(RadialModelProperties, RoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uw(1e-5, 5e-3);
  std::uniform_real_distribution<double> frac(0.0, 0.98);
  for (auto m : kFisheye) {
    for (int i = 0; i < 1000; ++i) {
      const double w = uw(rng);
      const double r_d = frac(rng) * distorted_radius_bound(m) / w;
      const double r_u = radial_inverse(m, w, r_d);
      const double back = radial_forward(m, w, r_u);
      EXPECT_NEAR(back, r_d, 1e-9 * std::max(1.0, r_d)) << to_string(m) << " w=" << w;
      // and the other direction
      const double fwd = radial_forward(m, w, r_d);
      EXPECT_NEAR(radial_inverse(m, w, fwd), r_d, 1e-9 * std::max(1.0, r_d));
    }
  }
}

TEST(RadialModelProperties, StrictlyIncreasingAndCompressing) {
  const double w = 1.0 / 600.0;
  for (auto m : kFisheye) {
    double prev = -1.0;
    for (int i = 1; i <= 2000; ++i) {
      const double r = i * 2.0;
      const double d = radial_forward(m, w, r);
      EXPECT_GT(d, prev) << to_string(m);
      EXPECT_LT(d, r) << to_string(m);
      prev = d;
    }
  }
}

TEST(RadialModelProperties, EquidistanceCloseToEquisolid) {
  const double w = 1.0 / 600.0;
  double eq_es = 0.0;
  double st_or = 0.0;
  for (int i = 0; i <= 1200; ++i) {
    const double r = i;
    eq_es = std::max(eq_es, std::abs(radial_forward(RadialModel::Equidistance, w, r) -
                                     radial_forward(RadialModel::EquisolidAngle, w, r)));
    st_or = std::max(st_or, std::abs(radial_forward(RadialModel::Stereographic, w, r) -
                                     radial_forward(RadialModel::Orthographic, w, r)));
  }
  EXPECT_LT(eq_es, st_or);
}

TEST(Intrinsics, FromSpecCentresPrincipalPoint) {
  CameraSpec spec{"c922", 1280, 720, 70.42, 43.3};
  const auto intr = intrinsics_from_spec(spec, 906.9, 0.0, RadialModel::Equidistance);
  EXPECT_EQ(intr.cx, 640.0);
  EXPECT_EQ(intr.cy, 360.0);
  EXPECT_EQ(intr.width, 1280);
}

TEST(Intrinsics, Hero9W1WithinDomain) {
  CameraSpec spec{"hero9-w1", 1920, 1080, 118, 69};
  const auto intr = intrinsics_from_spec(spec, 876.0, 0.001019, RadialModel::Equidistance);
  EXPECT_NEAR(intr.max_image_radius(), 1101.4, 0.1);
  EXPECT_LT(intr.omega * intr.max_image_radius(), kPi / 2.0);
}

TEST(Intrinsics, DomainViolationRejected) {
  CameraSpec spec{"x", 1280, 720, 100, 60};
  // 0.0022 * 734.3 = 1.615 > pi/2
  EXPECT_THROW(intrinsics_from_spec(spec, 500.0, 0.0022, RadialModel::Equidistance), DomainError);
  EXPECT_THROW(intrinsics_from_spec(spec, -1.0, 0.0, RadialModel::Equidistance), DomainError);
  EXPECT_THROW(intrinsics_from_spec(spec, 500.0, -1e-4, RadialModel::Equidistance), DomainError);
}

TEST(CameraSpecValidation, NamesOffendingField) {
  CameraSpec bad{"x", 1280, 720, 180.0, std::nullopt};
  try {
    validate(bad);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("fov_h_deg"), std::string::npos);
  }
  CameraSpec bad_v{"x", 1280, 720, 90.0, 0.0};
  EXPECT_THROW(validate(bad_v), DomainError);
  CameraSpec bad_w{"x", 0, 720, 90.0, 60.0};
  EXPECT_THROW(validate(bad_w), DomainError);
}

TEST(RadialModelNames, ParseRoundTrip) {
  for (auto m : kAllModels) EXPECT_EQ(parse_radial_model(to_string(m)), m);
  EXPECT_FALSE(parse_radial_model("fisheye").has_value());
}

}  // namespace
}  // namespace fovcalib
