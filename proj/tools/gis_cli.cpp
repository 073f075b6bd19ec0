#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gis/io.hpp"
#include "gis/verify.hpp"

namespace {

using gis::json;

struct Options {
  std::string input;
  std::string out;
  std::string suite;
  std::vector<double> p_list;
  int grid_n = 0;
  double tol = 0.0;
};

std::string read_input(const std::string& path) {
  if (path.empty()) throw gis::UsageError("--input is required");
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path);
  if (!in) throw gis::UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw gis::UsageError("cannot write " + out);
  f << text;
}

std::vector<double> p_list_for(const Options& o, const gis::ProblemDoc& d) {
  if (!o.p_list.empty()) return o.p_list;
  if (!d.p_list.empty()) return d.p_list;
  return {2.0};
}

gis::Classification classify_doc(const gis::ProblemDoc& d, const std::vector<double>& ps) {
  return std::visit(
      [&](const auto& p) -> gis::Classification {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, gis::GIString>) return gis::classify(p, ps);
        else if constexpr (std::is_same_v<T, gis::KreinString>) return gis::classify_krein(p, ps);
        else if constexpr (std::is_same_v<T, gis::ch::CHProblem>) return gis::ch::ch_classify(p, ps);
        else return gis::dprime::dp_classify(p, ps);
      },
      d.problem);
}

bool all_inconclusive(const gis::Classification& c) {
  using gis::Tri;
  if (c.zero_not_in_spectrum.value != Tri::Inconclusive || c.discrete.value != Tri::Inconclusive) return false;
  for (const auto& s : c.schatten)
    if (s.verdict.value != Tri::Inconclusive) return false;
  return true;
}

/// The string whose spectrum coincides with the problem's (delta_prime uses its truncation separately).
gis::GIString string_of(const gis::ProblemDoc& d) {
  return std::visit(
      [](const auto& p) -> gis::GIString {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, gis::GIString>) return p;
        else if constexpr (std::is_same_v<T, gis::KreinString>) return p.to_gis();
        else if constexpr (std::is_same_v<T, gis::ch::CHProblem>) return gis::ch::ch_to_string(p);
        else return gis::dprime::dp_string(p);
      },
      d.problem);
}

int cmd_classify(const Options& o) {
  const auto doc = gis::parse_problem(read_input(o.input));
  const auto c = classify_doc(doc, p_list_for(o, doc));
  json j = c;
  j["kind"] = doc.kind();
  emit(j, o.out);
  return all_inconclusive(c) ? 2 : 0;
}

int cmd_spectrum(const Options& o) {
  const auto doc = gis::parse_problem(read_input(o.input));
  gis::RefineOptions opt;
  opt.max_n = o.grid_n > 0 ? o.grid_n : doc.grid_n.value_or(512);
  opt.target_rel_tol = o.tol > 0.0 ? o.tol : doc.tol.value_or(1e-6);
  opt.start_n = std::min(opt.start_n, opt.max_n);
  const auto cls = classify_doc(doc, {2.0});
  gis::Spectrum s;
  json j;
  if (auto dp = std::get_if<gis::dprime::DeltaPrimeProblem>(&doc.problem)) {
    const double x = doc.truncation.value_or(10.0);
    s = gis::dprime::dp_spectrum(*dp, x, opt);
    j = s;
    j["truncation"] = x;
  } else {
    s = gis::refine_until(string_of(doc), opt);
    j = s;
  }
  j["kind"] = doc.kind();
  j["discreteness_caveat"] = cls.discrete.value != gis::Tri::Yes;
  emit(j, o.out);
  return 0;
}

int cmd_transform(const Options& o) {
  const auto doc = gis::parse_problem(read_input(o.input));
  gis::ProblemDoc out;
  out.problem = string_of(doc);
  out.p_list = doc.p_list;
  out.grid_n = doc.grid_n;
  out.tol = doc.tol;
  emit(json(out), o.out);
  return 0;
}

int cmd_verify(const Options& o) {
  const auto rep = gis::verify::run_suite(o.suite);
  json cases = json::array();
  for (const auto& c : rep.cases)
    cases.push_back({{"name", c.name}, {"pass", c.pass}, {"error", c.error}, {"tolerance", c.tolerance}, {"detail", c.detail}});
  emit({{"suite", rep.suite},
        {"passed", rep.passed()},
        {"total", static_cast<int>(rep.cases.size())},
        {"max_error", rep.max_error()},
        {"pass", rep.pass()},
        {"cases", cases}},
       o.out);
  return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra and spectral classification of generalized indefinite strings"};
  app.require_subcommand(1);
  Options o;
  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "problem JSON file, or - for stdin")->required();
    sub->add_option("--out", o.out, "write the result here instead of stdout");
  };
  auto* classify = app.add_subcommand("classify", "closed-form verdicts");
  add_io(classify);
  classify->add_option("--p", o.p_list, "Schatten exponents, comma separated")->delimiter(',');
  auto* spectrum = app.add_subcommand("spectrum", "numerical spectrum with grid refinement");
  add_io(spectrum);
  spectrum->add_option("--grid-n", o.grid_n, "largest grid size");
  spectrum->add_option("--tol", o.tol, "relative tolerance for the leading eigenvalues");
  auto* transform = app.add_subcommand("transform", "rewrite the problem as a generalized indefinite string");
  add_io(transform);
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("--suite", o.suite, "traces, hs, crossval, ch-consistency, dp-calibration or calibration")->required();
  verify->add_option("--out", o.out, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  try {
    if (*classify) return cmd_classify(o);
    if (*spectrum) return cmd_spectrum(o);
    if (*transform) return cmd_transform(o);
    return cmd_verify(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
