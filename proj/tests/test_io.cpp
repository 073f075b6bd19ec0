#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gis/io.hpp"
#include "gis/verify.hpp"

using namespace gis;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemDoc round_trip(const ProblemDoc& d) { return parse_problem(json(d).dump()); }

std::vector<std::filesystem::path> problem_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(GIS_PROBLEMS_DIR))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(ProblemFiles, ParseAndRoundTrip) {
  const auto files = problem_files();
  ASSERT_GE(files.size(), 8u);
  for (const auto& f : files) {
    SCOPED_TRACE(f.filename().string());
    const ProblemDoc d = parse_problem(slurp(f));
    EXPECT_EQ(round_trip(d), d);
    EXPECT_EQ(json(d).dump(2), json(round_trip(d)).dump(2));
  }
}

TEST(RoundTrip, EveryTailVariant) {
  std::vector<WTail> wtails{NoTail{}, ConstantTail{1.5}, PowerTail{1.0, -2.0, 0.75, 1.5}, PolynomialTail{{1.0, 0.5}},
                            EndpointTail{0.5, 1.0, 0.25, 2.0}};
  for (const auto& t : wtails) EXPECT_EQ(json(t).get<WTail>(), t);
  std::vector<DensityTail> dtails{ZeroDensity{}, PowerDensity{2.0, 3.0, 1.0}, EndpointDensity{1.0, 0.5, 2.0}};
  for (const auto& t : dtails) EXPECT_EQ(json(t).get<DensityTail>(), t);
  EXPECT_EQ(json(ExtendedLength::infinite()), json("infinite"));
  EXPECT_EQ(json(ExtendedLength::finite(2.0)).get<ExtendedLength>(), ExtendedLength::finite(2.0));
}

TEST(RoundTrip, ChAndDeltaPrimeProblems) {
  for (const auto& p : verify::ch_corpus()) {
    ProblemDoc d;
    d.problem = p;
    EXPECT_EQ(round_trip(d), d);
  }
  using namespace dprime;
  const std::vector<DeltaPrimeProblem> dps{{ExplicitSupport{{{1.0, -0.5}, {2.0, 1.0}}}},
                                           {Generator{1.0, 0.5, MinusGap{}}},
                                           {Generator{2.0, 1.0 / 3.0, MinusGap{PowerPerturbation{0.5, 2.0}}}},
                                           {Generator{1.0, 1.0, ConstantStrength{0.5}}}};
  for (const auto& p : dps) {
    ProblemDoc d;
    d.problem = p;
    d.truncation = 4.0;
    d.p_list = {2.0};
    EXPECT_EQ(round_trip(d), d);
  }
}

TEST(RoundTrip, ClassificationAndSpectrum) {
  for (const auto& f : problem_files()) {
    const ProblemDoc d = parse_problem(slurp(f));
    if (auto s = std::get_if<GIString>(&d.problem)) {
      const Classification c = classify(*s, {1.5, 2.0});
      EXPECT_EQ(json(json(c).get<Classification>()).dump(), json(c).dump());
    }
  }
  Spectrum s;
  s.eigenvalues = {-1.0, 2.5};
  s.mu_cut = 1e-13;
  s.model_size = 7;
  s.converged = false;
  s.grid_sizes = {4, 8};
  s.deltas = {0.1, 0.2};
  s.notes = {"capped"};
  EXPECT_EQ(json(s).get<Spectrum>(), s);
}

TEST(RoundTrip, NonFiniteNumbers) {
  SpectralSum inf{std::numeric_limits<double>::infinity(), SumKind::UpperBound};
  const SpectralSum back = json(inf).get<SpectralSum>();
  EXPECT_TRUE(std::isinf(back.value));
  EXPECT_EQ(back.kind, SumKind::UpperBound);
}

TEST(Determinism, IdenticalInputGivesIdenticalBytes) {
  for (const auto& f : problem_files()) {
    const std::string text = slurp(f);
    EXPECT_EQ(json(parse_problem(text)).dump(2), json(parse_problem(text)).dump(2));
  }
}

TEST(ParseErrors, SchemaAndModelViolations) {
  EXPECT_THROW(parse_problem("{not json"), ParseError);
  EXPECT_THROW(parse_problem(R"({"kind": "banana"})"), ParseError);
  EXPECT_THROW(parse_problem(R"({"L": "infinite"})"), ParseError);
  EXPECT_THROW(parse_problem(R"({"kind": "krein", "L": "infinite"})"), ParseError);
  EXPECT_THROW(parse_problem(R"({"kind": "krein", "L": {"finite": "x"}, "omega": {}})"), ParseError);
  // atom outside [0, L)
  EXPECT_THROW(parse_problem(R"({"kind": "krein", "L": {"finite": 1.0}, "omega": {"atoms": [[2.0, 1.0]]}})"),
               DomainError);
  EXPECT_NO_THROW(parse_problem(R"({"kind": "krein", "L": {"finite": 1.0}, "omega": {"atoms": [[0.5, 1.0]]}})"));
}
