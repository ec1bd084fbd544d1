#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "tosc_cli.hpp"

using namespace tosc;
using testing_support::read_text;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

struct CliResult {
  int status = 0;
  std::string out, err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tosc-bounds");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.status = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(Cli, ClosedFormImageNetFloor) {
  const CliResult r = run_cli({"closed-form", "--kind", "uniform", "--classes", "1000", "--d", "0.239"});
  ASSERT_EQ(r.status, 0) << r.err;
  const double expected = std::log2(1000.0) - oracle::h2(0.239) - 0.239 * std::log2(999.0);
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "kind,parameter,distortion,rate_bits");
  const double rate = std::stod(row.substr(row.rfind(',') + 1));
  EXPECT_NEAR(rate, expected, 1e-8);
}

TEST(Cli, ClosedFormBinaryWithPixels) {
  const CliResult r =
      run_cli({"closed-form", "--kind", "binary", "--q", "0.5", "--d", "0", "--pixels", "784"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("binary,0.5,0,1,0.00127551"), std::string::npos) << r.out;
}

TEST(Cli, ClosedFormDomainErrors) {
  const CliResult r = run_cli({"closed-form", "--kind", "uniform", "--classes", "1", "--d", "0.1"});
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(count_lines(r.err), 1u);
  EXPECT_NE(run_cli({"closed-form", "--kind", "binary", "--q", "1.5", "--d", "0.1"}).status, 0);
  EXPECT_NE(run_cli({"closed-form", "--kind", "uniform"}).status, 0);
}

TEST(Cli, IdentityConfusionOrdAndIecCoincide) {
  TempDir dir;
  std::string s;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) s += (j ? "," : "") + std::string(i == j ? "50" : "0");
    s += '\n';
  }
  write_text(dir / "c.csv", s);
  const CliResult r = run_cli({"class-bounds", "--confusion", (dir / "c.csv").string(), "--methods",
                         "ord,iec", "--out", (dir / "o.csv").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto curves = io::read_curves_csv(dir / "o.csv");
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[0].method, "iec");
  EXPECT_EQ(curves[1].method, "ord");
  for (const auto& c : curves)
    for (const auto& p : c.points)
      EXPECT_NEAR(p.rate, rd_uniform_classes(10, p.distortion), 1e-3) << c.method;
}

TEST(Cli, ClassBoundsAllMethodsAndMergeSweep) {
  TempDir dir;
  write_text(dir / "c.csv", "80,15,5\n10,85,5\n5,10,85\n");
  const CliResult r = run_cli({"class-bounds", "--confusion", (dir / "c.csv").string(), "--pixels",
                         "1024", "--lambda-points", "20"});
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* m : {"\nec,", "\niec,", "\nord,", "\nts,", "\nmerge,"})
    EXPECT_NE(r.out.find(m), std::string::npos) << m;
  for (const char* k : {"k=0", "k=1", "k=2"}) EXPECT_NE(r.out.find(k), std::string::npos);
  const CliResult one = run_cli({"class-bounds", "--confusion", (dir / "c.csv").string(), "--methods",
                           "merge", "--k", "1"});
  ASSERT_EQ(one.status, 0) << one.err;
  EXPECT_EQ(count_lines(one.out), 2u);
  EXPECT_NE(run_cli({"class-bounds", "--confusion", (dir / "c.csv").string(), "--methods",
                     "merge", "--k", "3"})
                .status,
            0);
}

TEST(Cli, PriorChoices) {
  TempDir dir;
  write_text(dir / "c.csv", "0.9,0.1\n0.3,0.7\n");
  const CliResult ambiguous = run_cli({"class-bounds", "--confusion", (dir / "c.csv").string()});
  EXPECT_NE(ambiguous.status, 0);
  EXPECT_NE(ambiguous.err.find("prior"), std::string::npos);
  EXPECT_EQ(run_cli({"class-bounds", "--confusion", (dir / "c.csv").string(), "--prior",
                     "uniform", "--methods", "ts"})
                .status,
            0);
  write_text(dir / "p.csv", "0.6,0.4\n");
  const CliResult with_file = run_cli({"class-bounds", "--confusion", (dir / "c.csv").string(),
                                 "--prior", (dir / "p.csv").string(), "--methods", "merge"});
  ASSERT_EQ(with_file.status, 0) << with_file.err;
  // k = 0 point: D_TM = 0.6 * 0.1 + 0.4 * 0.3.
  EXPECT_NE(with_file.out.find(",0.18,,k=0"), std::string::npos) << with_file.out;
}

TEST(Cli, NeverPredictedClassWarns) {
  TempDir dir;
  write_text(dir / "c.csv", "5,5,0\n1,9,0\n3,3,0\n");
  const CliResult r = run_cli({"class-bounds", "--confusion", (dir / "c.csv").string(), "--methods",
                         "iec", "--lambda-points", "5"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("warning: class 2 is never predicted"), std::string::npos) << r.err;
}

TEST(Cli, BaSubcommand) {
  TempDir dir;
  write_text(dir / "s.csv", "0.5\n0.5\n");
  write_text(dir / "d.csv", "0,1\n1,0\n");
  const CliResult r = run_cli({"ba", "--source", (dir / "s.csv").string(), "--distortion",
                         (dir / "d.csv").string(), "--out", (dir / "o.csv").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto curves = io::read_curves_csv(dir / "o.csv");
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_GT(curves[0].size(), 30u);
  for (const auto& p : curves[0].points) EXPECT_NEAR(p.rate, rd_binary(0.5, p.distortion), 1e-3);
}

TEST(Cli, SynthThenSnc) {
  TempDir dir;
  const auto logits = (dir / "l.csv").string();
  ASSERT_EQ(run_cli({"synth", "--kind", "gmm", "--samples", "3000", "--seed", "5", "--out", logits})
                .status,
            0);
  const CliResult r = run_cli({"snc", "--logits", logits, "--methods", "snc,iec", "--lambda-points", "10"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find(",empirical\n"), std::string::npos);
  EXPECT_NE(r.out.find("\niec,"), std::string::npos);
}

TEST(Cli, DeterministicOutputs) {
  TempDir dir;
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  for (const auto& p : {a, b})
    ASSERT_EQ(run_cli({"synth", "--kind", "dirichlet", "--classes", "5", "--samples", "200",
                       "--seed", "9", "--out", p})
                  .status,
              0);
  EXPECT_EQ(read_text(a), read_text(b));
  const auto ca = (dir / "ca.csv").string(), cb = (dir / "cb.csv").string();
  for (const auto& p : {ca, cb})
    ASSERT_EQ(run_cli({"snc", "--logits", a, "--methods", "snc,ec", "--out", p}).status, 0);
  EXPECT_EQ(read_text(ca), read_text(cb));
}

TEST(Cli, FailuresWriteNothing) {
  TempDir dir;
  write_text(dir / "bad.csv", "1,2\n3\n");
  const auto out = dir / "o.csv";
  const CliResult r = run_cli({"class-bounds", "--confusion", (dir / "bad.csv").string(), "--out",
                         out.string()});
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(count_lines(r.err), 1u);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
  EXPECT_FALSE(std::filesystem::exists(out));

  write_text(out, "previous\n");
  write_text(dir / "l.csv", "label,l0,l1\n0,1,nan\n1,1,2\n");
  EXPECT_NE(run_cli({"snc", "--logits", (dir / "l.csv").string(), "--out", out.string()}).status, 0);
  EXPECT_EQ(read_text(out), "previous\n");
  EXPECT_FALSE(std::filesystem::exists(dir / "o.csv.tmp"));
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run_cli({}).status, 0);
  EXPECT_NE(run_cli({"frobnicate"}).status, 0);
  EXPECT_NE(run_cli({"closed-form", "--d", "0.1", "--bogus"}).status, 0);
  EXPECT_NE(run_cli({"gmm", "--methods", "ord,xyz"}).status, 0);
  EXPECT_NE(run_cli({"gmm", "--grid-bins", "100", "--methods", "ord"}).status, 0);
  const CliResult inverted = run_cli({"ba", "--source", "s", "--distortion", "d", "--lambda-min", "5",
                                "--lambda-max", "1"});
  EXPECT_NE(inverted.status, 0);
  EXPECT_NE(inverted.err.find("--lambda-min"), std::string::npos);
  EXPECT_NE(run_cli({"ba", "--source", "s", "--distortion", "d", "--lambda-points", "0"}).status, 0);
}

TEST(Cli, HelpListsFlagsWithUnits) {
  const CliResult top = run_cli({"--help"});
  EXPECT_EQ(top.status, 0);
  for (const char* sub : {"closed-form", "ba", "class-bounds", "gmm", "snc", "synth"})
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
  const CliResult gmm = run_cli({"gmm", "--help"});
  EXPECT_EQ(gmm.status, 0);
  for (const char* flag : {"--lambda-min", "--lambda-max", "--lambda-points", "--lambda-scale",
                           "--grid-half-width", "--grid-bins", "--q", "--tol", "--max-iters",
                           "--pixels", "--out", "--methods"})
    EXPECT_NE(gmm.out.find(flag), std::string::npos) << flag;
  EXPECT_NE(gmm.out.find("nats"), std::string::npos);
  EXPECT_NE(gmm.out.find("(count)"), std::string::npos);
  const CliResult cb = run_cli({"class-bounds", "--help"});
  for (const char* flag : {"--confusion", "--prior", "--k"})
    EXPECT_NE(cb.out.find(flag), std::string::npos) << flag;
  const CliResult sy = run_cli({"synth", "--help"});
  for (const char* flag : {"--seed", "--classes", "--samples"})
    EXPECT_NE(sy.out.find(flag), std::string::npos) << flag;
  EXPECT_NE(run_cli({"snc", "--help"}).out.find("--logits"), std::string::npos);
}

TEST(Cli, SmallGmmRun) {
  const CliResult r = run_cli({"gmm", "--grid-bins", "121", "--lambda-points", "20", "--ce-points", "6"});
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* m : {"\nce,", "\nec,", "\nird,", "\nord,"})
    EXPECT_NE(r.out.find(m), std::string::npos) << m;
}
