#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hoqmc/io.hpp"

using namespace hoqmc;

namespace {

ConstructionParams relaxed(std::uint32_t b, unsigned s, unsigned beta, unsigned g, unsigned w) {
  ConstructionParams p;
  p.s = s;
  p.alpha = 2;
  p.beta = beta;
  p.g = g;
  p.w = w;
  p.b = PrimeBase(b);
  p.strict = false;
  return p;
}

}  // namespace

TEST(Json, MatrixRoundTrip) {
  const PrimeBase b(7);
  const FieldMatrix m(b, 2, 3, {1, 2, 3, 4, 5, 6});
  const Json j = to_json(m);
  EXPECT_EQ(j.dump(), R"({"b":7,"rows":2,"cols":3,"entries":[[1,2,3],[4,5,6]]})");
  EXPECT_EQ(field_matrix_from_json(j), m);
}

TEST(Json, MatrixRejectsBadEntries) {
  EXPECT_THROW(field_matrix_from_json(Json::parse(R"({"b":3,"rows":1,"cols":1,"entries":[[3]]})")), InvalidInput);
  EXPECT_THROW(field_matrix_from_json(Json::parse(R"({"b":3,"rows":1,"cols":2,"entries":[[1]]})")), InvalidInput);
  EXPECT_THROW(field_matrix_from_json(Json::parse(R"({"b":4,"rows":1,"cols":1,"entries":[[1]]})")), InvalidInput);
  EXPECT_THROW(field_matrix_from_json(Json::parse(R"({"b":3,"rows":1,"cols":1})")), InvalidInput);
  EXPECT_THROW(field_matrix_from_json(Json::parse(R"({"b":"x","rows":1,"cols":1,"entries":[[1]]})")), InvalidInput);
}

TEST(Json, ParamsRoundTrip) {
  auto p = relaxed(5, 2, 2, 1, 2);
  p.betas = {3, 1};
  const auto q = construction_params_from_json(to_json(p));
  EXPECT_EQ(to_json(q), to_json(p));
  EXPECT_EQ(q.betas, p.betas);
  EXPECT_FALSE(q.strict);
}

TEST(Json, NetRoundTrip) {
  for (const auto& p : {relaxed(11, 1, 4, 2, 1), relaxed(5, 2, 2, 1, 1)}) {
    const auto net = construct_optimal_net(p);
    const Json j = to_json(net);
    EXPECT_EQ(j["provenance"], "Interlaced");
    EXPECT_EQ(j["m"], net.m());
    EXPECT_EQ(j["n"], net.n());
    const auto back = net_from_json(net_from_text_json(j.dump()));
    EXPECT_EQ(to_json(back).dump(), j.dump());
    ASSERT_TRUE(back.params());
    EXPECT_EQ(back.params()->w, p.w);
  }
}

TEST(Json, MalformedNetIsRejected) {
  EXPECT_THROW(net_from_text_json("{\"b\": 2,"), InvalidInput);
  EXPECT_THROW(net_from_json(Json::parse(R"({"b":2,"s":1,"m":1,"n":1})")), InvalidInput);
  // shape disagreement
  EXPECT_THROW(net_from_json(Json::parse(
                   R"({"b":2,"s":1,"m":2,"n":1,"matrices":[{"b":2,"rows":1,"cols":1,"entries":[[1]]}]})")),
               InvalidInput);
  // matrix count disagreement
  EXPECT_THROW(net_from_json(Json::parse(
                   R"({"b":2,"s":2,"m":1,"n":1,"matrices":[{"b":2,"rows":1,"cols":1,"entries":[[1]]}]})")),
               InvalidInput);
  // base disagreement
  EXPECT_THROW(net_from_json(Json::parse(
                   R"({"b":2,"s":1,"m":1,"n":1,"matrices":[{"b":3,"rows":1,"cols":1,"entries":[[1]]}]})")),
               InvalidInput);
  EXPECT_THROW(net_from_json(Json::parse(
                   R"({"b":2,"s":1,"m":1,"n":1,"provenance":"Sobol","matrices":[{"b":2,"rows":1,"cols":1,"entries":[[1]]}]})")),
               InvalidInput);
}

TEST(Json, MetricsKeys) {
  const auto p = relaxed(5, 1, 2, 2, 1);
  const auto net = construct_optimal_net(p);
  const auto j = metrics_json(measure_metrics(net, 2), metric_lower_bounds(p));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"hamming_min", "nrt_min", "mu_alpha_min", "dual_size", "bounds",
                                            "bounds_satisfied"}));
  EXPECT_TRUE(j["bounds_satisfied"].get<bool>());
  EXPECT_TRUE(j["mu_alpha_min"].contains("2"));
  const auto none = metrics_json(measure_metrics(net, 1), std::nullopt);
  EXPECT_TRUE(none["bounds_satisfied"].is_null());
}

TEST(Json, WceReportKeys) {
  const std::vector<std::vector<double>> origin{{0.0}};
  const auto j = to_json(wce_exact(std::span<const std::vector<double>>(origin), 2));
  EXPECT_NEAR(j["e"].get<double>(), 0.5082650, 1e-7);
  EXPECT_EQ(j["method"], "ExactKernelSum");
  EXPECT_TRUE(j["truncation_radius"].is_null());
  EXPECT_FALSE(j.contains("main_part"));
}

TEST(Json, WalshCoefficientAndIndex) {
  const auto j = to_json(WalshCoefficient{{0.5, -0.25}, 1e-16});
  EXPECT_EQ(j.dump(), R"({"re":0.5,"im":-0.25,"abs_error":1e-16})");
  const PrimeBase b(3);
  EXPECT_EQ(to_json(DigitVector::from_integer(b, 10)).dump(), R"({"value":"10","b":3})");
}

TEST(Csv, PointsRationalAndDecimal) {
  const PrimeBase b(2);
  const DigitalNet net(b, {FieldMatrix::identity(b, 2), FieldMatrix(b, 2, 2, {0, 1, 1, 0})});
  EXPECT_EQ(points_csv(net, PointFormat::Rational), "0/2^2,0/2^2\n2/2^2,1/2^2\n1/2^2,2/2^2\n3/2^2,3/2^2\n");
  EXPECT_EQ(points_csv(net, PointFormat::Decimal), "0,0\n0.5,0.25\n0.25,0.5\n0.75,0.75\n");
}
