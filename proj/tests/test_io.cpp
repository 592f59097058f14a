#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "mf/error.h"
#include "mf/io.h"

using namespace mf;
using io::Json;

namespace {

template <class F> ErrorCode code_of(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

CubatureRule small_rule() {
  Rng rng(3);
  CubatureRule r = probabilistic_rule(5, 2, 4, 2, rng);
  certify_all_below(r);
  return r;
}

} // namespace

TEST(JsonIo, ProjectorExample) {
  const Projector p = io::projector_from_json(
      io::parse(R"({"d": 2, "k": 1, "entries": [0, 0, 0, 1]})"));
  EXPECT_EQ(p.rank(), 1);
  EXPECT_DOUBLE_EQ(p.matrix()(1, 1), 1.0);
  EXPECT_EQ(io::to_json(p)["entries"].size(), 4u);
  EXPECT_EQ(code_of([] {
              io::projector_from_json(
                  io::parse(R"({"d": 2, "k": 1, "entries": [1, 0, 0, 1]})"));
            }),
            ErrorCode::InvariantViolated);
}

TEST(JsonIo, RuleRoundTripIsBitExact) {
  const CubatureRule r = small_rule();
  const std::string text = io::dump(io::to_json(r));
  const CubatureRule back = io::rule_from_json(io::parse(text));
  EXPECT_EQ(io::dump(io::to_json(back)), text);
  ASSERT_EQ(back.size(), r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    EXPECT_EQ(back.weights[j], r.weights[j]);
    EXPECT_EQ(back.nodes[j].matrix(), r.nodes[j].matrix());
  }
  EXPECT_EQ(back.gap, r.gap);
  EXPECT_EQ(back.gaps_by_degree, r.gaps_by_degree);
}

TEST(JsonIo, UncertifiedGapIsNull) {
  CubatureRule r = small_rule();
  r.gap = std::numeric_limits<double>::infinity();
  r.gaps_by_degree.clear();
  const Json j = io::to_json(r);
  EXPECT_TRUE(j["gap"].is_null());
  EXPECT_FALSE(j.contains("gaps_by_degree"));
  EXPECT_TRUE(std::isinf(io::rule_from_json(j).gap));
}

TEST(JsonIo, MomentTensorLayout) {
  MomentTensor m(2, 2);
  m.at(MultiIndex({1, 0})) = 0.1;
  m.at(MultiIndex({1, 1})) = -1.0 / 3;
  m.approximate = true;
  m.epsilon = 1e-3;
  const Json j = io::to_json(m);
  ASSERT_EQ(j["values"].size(), 6u);
  // Graded lexicographic: 00, 01, 10, 02, 11, 20.
  EXPECT_EQ(j["values"][2]["s"], Json::array({1, 0}));
  EXPECT_EQ(j["values"][4]["s"], Json::array({1, 1}));
  const std::string text = io::dump(j);
  const MomentTensor back = io::moment_tensor_from_json(io::parse(text));
  EXPECT_EQ(back.values(), m.values());
  EXPECT_TRUE(back.approximate);
  EXPECT_EQ(back.epsilon, 1e-3);
  EXPECT_EQ(io::dump(io::to_json(back)), text);
}

TEST(JsonIo, MomentTensorRejectsReordering) {
  Json j = io::to_json(MomentTensor(2, 1));
  std::swap(j["values"][1], j["values"][2]);
  EXPECT_EQ(code_of([&] { io::moment_tensor_from_json(j); }),
            ErrorCode::ParseError);
  Json short_j = io::to_json(MomentTensor(2, 1));
  short_j["values"].erase(2);
  EXPECT_EQ(code_of([&] { io::moment_tensor_from_json(short_j); }),
            ErrorCode::ParseError);
}

TEST(JsonIo, ProjectedSetAndEnsemble) {
  Rng rng(4);
  const auto dist = random_atoms(3, 4, true, rng);
  MeasurementEnsemble ens;
  ens.d = 3;
  ens.k = 2;
  for (int j = 0; j < 2; ++j)
    ens.matrices.push_back(Matrix::NullaryExpr(2, 3, [&] { return rng.normal(); }));

  const std::string et = io::dump(io::to_json(ens));
  const MeasurementEnsemble eb = io::ensemble_from_json(io::parse(et));
  EXPECT_EQ(eb.matrices[1], ens.matrices[1]);
  EXPECT_EQ(io::dump(io::to_json(eb)), et);

  const auto set = project_moments(dist, ens, 2, Convention::QX);
  const std::string st = io::dump(io::to_json(set));
  const ProjectedMomentSet sb = io::projected_from_json(io::parse(st));
  EXPECT_EQ(sb.convention, Convention::QX);
  EXPECT_TRUE(sb.sphere_supported);
  EXPECT_EQ(sb.tensors[0].values(), set.tensors[0].values());
  EXPECT_EQ(io::dump(io::to_json(sb)), st);

  const std::string dt = io::dump(io::to_json(dist));
  EXPECT_EQ(io::dump(io::to_json(io::distribution_from_json(io::parse(dt)))), dt);
}

TEST(JsonIo, RandomDoublesSurvive) {
  Rng rng(5);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i)
    xs.push_back(std::ldexp(rng.normal(), static_cast<int>(rng.uniform() * 200) - 100));
  xs.push_back(0.1);
  xs.push_back(std::numeric_limits<double>::denorm_min());
  xs.push_back(-std::numeric_limits<double>::max());
  const Json back = io::parse(io::dump(Json(xs)));
  for (std::size_t i = 0; i < xs.size(); ++i)
    EXPECT_EQ(back[i].get<double>(), xs[i]);
}

TEST(JsonIo, MissingFieldsAreParseErrors) {
  EXPECT_EQ(code_of([] { io::rule_from_json(io::parse(R"({"d": 3})")); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::parse("{"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] {
              io::projected_from_json(
                  io::parse(R"({"convention": "XY", "p": 1, "tensors": []})"));
            }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] {
              io::distribution_from_json(
                  io::parse(R"({"atoms": [[1, 0]], "probs": [0.5]})"));
            }),
            ErrorCode::InvalidArgument);
}

TEST(CsvIo, RoundTripIsBitExact) {
  Rng rng(6);
  const SampleBatch batch = sample(NamedLaw::Gaussian, 3, 50, rng);
  std::stringstream ss;
  io::write_csv(ss, batch);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, 9), "x1,x2,x3\n");
  std::istringstream in(text);
  const SampleBatch back = io::read_csv(in);
  EXPECT_EQ(back.d, 3);
  EXPECT_EQ(back.data, batch.data);
}

TEST(CsvIo, RejectsMalformedInput) {
  std::istringstream bad_header("a,b\n1,2\n");
  EXPECT_EQ(code_of([&] { io::read_csv(bad_header); }), ErrorCode::ParseError);
  std::istringstream short_row("x1,x2\n1,2\n3\n");
  EXPECT_EQ(code_of([&] { io::read_csv(short_row); }), ErrorCode::ParseError);
  std::istringstream junk("x1\nabc\n");
  EXPECT_EQ(code_of([&] { io::read_csv(junk); }), ErrorCode::ParseError);
}
