#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "hankel/cli.hpp"

using namespace hankel;

namespace {

struct Outcome {
  int code;
  io::Json json;
  std::string text;
};

Outcome run(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "hankel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::istringstream in(stdin_text);
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, in);
  return {code, io::Json::parse(out.str()), out.str()};
}

std::string sample(const std::string& name) { return std::string(HANKEL_SAMPLES_DIR) + "/" + name; }

}  // namespace

TEST(Cli, CheckHilbert) {
  const Outcome r = run({"check", sample("hilbert.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.json["partial_positive_definite"], true);
}

TEST(Cli, CheckNegativeExitsTwo) {
  const Outcome r = run({"check", sample("negative-minor.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.json["partial_positive_definite"], false);
}

TEST(Cli, ClassifyForbidden) {
  const Outcome r = run({"classify-pattern", "0,1,4"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.json["status"], "NOT_PD_COMPLETABLE");
  const auto w = io::parse_sequence(r.json["witness"]);
  EXPECT_EQ(w.value(0), 1.0);
  EXPECT_EQ(w.value(1), 0.5);
  EXPECT_EQ(w.value(4), 1.0 / 16);
}

TEST(Cli, ClassifyPositive) {
  const Outcome r = run({"classify-pattern", "1,3,7,11", "--horizon", "12"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.json["status"], "PD_COMPLETABLE");
  EXPECT_EQ(r.json["strategy"], "schur");
}

TEST(Cli, CompleteEvenHilbertByMeasure) {
  const Outcome r = run({"complete", "--strategy", "measure", "--d", "2", "--l0", "0", "--horizon", "20",
                     sample("even-hilbert.json")});
  ASSERT_EQ(r.code, 0) << r.text;
  const auto c = r.json["completed"].get<std::vector<double>>();
  ASSERT_EQ(c.size(), 21u);
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_NEAR(c[2 * k], 1.0 / (k + 1), 1e-12);
  // exact arithmetic gives a PD H_10; in doubles it is PSD within psd_tol
  EXPECT_TRUE(check_definiteness(hankel_matrix(c, 10)).is_psd);
}

TEST(Cli, CompleteAutoAndSchur) {
  for (const std::string strategy : {"auto", "schur"}) {
    const Outcome r = run({"complete", "--strategy", strategy, sample("odd-gaps.json")});
    ASSERT_EQ(r.code, 0) << r.text;
    EXPECT_EQ(r.json["promises_pd"], true);
    const auto c = r.json["completed"].get<std::vector<double>>();
    EXPECT_TRUE(check_definiteness(hankel_matrix(c, 5)).is_pd);
    EXPECT_EQ(c[3], 0.25);
  }
}

TEST(Cli, CompleteGeometric) {
  const Outcome r = run({"complete", "--strategy", "geometric", "--horizon", "6", sample("geometric.json")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.json["completed"][5], 486.0);
  EXPECT_EQ(r.json["completed"][6], 1458.0);
  EXPECT_EQ(r.json["unique_psd"], true);
}

TEST(Cli, CompleteLift) {
  // H_10 of the lifted Hilbert data sits below the 1e-12 margin in doubles; H_4 does not
  const Outcome r = run({"complete", "--strategy", "lift", "--d", "2", "--horizon", "8", "-"},
                        R"({"entries": [{"index": 0, "value": 1}, {"index": 2, "value": 0.5},
                                        {"index": 4, "value": 0.3333333333333333},
                                        {"index": 6, "value": 0.25}, {"index": 8, "value": 0.2}]})");
  ASSERT_EQ(r.code, 0) << r.text;
  EXPECT_EQ(r.json["promises_pd"], true);
  EXPECT_GT(r.json["epsilon"].get<double>(), 0.0);
}

TEST(Cli, MeasureExtract) {
  const Outcome r = run({"measure", "extract", "-"},
                    R"({"entries": [{"index": 0, "value": 2}, {"index": 1, "value": 6},
                                    {"index": 2, "value": 18}]})");
  ASSERT_EQ(r.code, 0) << r.text;
  ASSERT_EQ(r.json["atoms"].size(), 1u);
  EXPECT_NEAR(r.json["atoms"][0]["location"].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(r.json["atoms"][0]["weight"].get<double>(), 2.0, 1e-12);
}

TEST(Cli, OracleCertificates) {
  const Outcome pd = run({"oracle", sample("catalog-014.json")});
  EXPECT_EQ(pd.code, 2);
  EXPECT_EQ(pd.json["obstruction"]["lower"]["interval"]["lo"], 0.25);
  EXPECT_EQ(pd.json["obstruction"]["upper"]["interval"]["hi"], 0.25);
  const Outcome psd = run({"oracle", "--psd", sample("kernel-conflict.json")});
  EXPECT_EQ(psd.code, 2);
  EXPECT_EQ(psd.json["obstruction"]["kind"], "kernel");
  const Outcome ok = run({"oracle", sample("hilbert.json")});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.json["feasible"], true);
}

TEST(Cli, Witness) {
  const Outcome r = run({"witness", "0,3,4", "--seed", "3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.json["found"], true);
  const Outcome none = run({"witness", "0,1,2,3,4", "--budget", "200"});
  EXPECT_EQ(none.code, 0);
  EXPECT_EQ(none.json["found"], false);
}

TEST(Cli, Errors) {
  const Outcome unknown = run({"check", "-"}, R"({"entries": [], "extra": 1})");
  EXPECT_EQ(unknown.code, 1);
  EXPECT_EQ(unknown.json["error"]["kind"], "InvalidInput");
  const Outcome malformed = run({"check", "-"}, "{");
  EXPECT_EQ(malformed.code, 1);
  const Outcome offset = run({"complete", "--strategy", "measure", "--l0", "1", sample("hilbert.json")});
  EXPECT_EQ(offset.json["error"]["kind"], "BadOffset");
  const Outcome missing = run({"check", sample("nope.json")});
  EXPECT_EQ(missing.code, 1);
  const Outcome bad = run({"frobnicate"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(bad.json.contains("error"));
  const Outcome tol = run({"--pd-margin", "-1", "check", sample("hilbert.json")});
  EXPECT_EQ(tol.code, 1);
}

TEST(Cli, DeterministicOutput) {
  const auto a = run({"witness", "0,1,3,4", "--seed", "5"}).text;
  const auto b = run({"witness", "0,1,3,4", "--seed", "5"}).text;
  EXPECT_EQ(a, b);
}

TEST(Cli, SeventeenDigits) {
  const Outcome r = run({"check", "-"}, R"({"entries": [{"index": 0, "value": 0.1}]})");
  // 0.1 is not representable; %.17g shows the stored double
  const Outcome c = run({"complete", "--strategy", "geometric", "--horizon", "2", "-"},
                    R"({"entries": [{"index": 0, "value": 1}, {"index": 1, "value": 0.1},
                                    {"index": 2, "value": 0.010000000000000002}]})");
  ASSERT_EQ(c.code, 0) << c.text;
  EXPECT_NE(c.text.find("0.10000000000000001"), std::string::npos);
  EXPECT_EQ(r.code, 0);
}
