#include <doctest.h>

#include <fstream>

#include "jetgeom/cli.hpp"

using namespace jetgeom;

namespace {

std::string data(const std::string& name) { return std::string(JETGEOM_TEST_DATA) + "/" + name; }

RunOutcome run(std::vector<std::string> args) { return run_command(args); }

}  // namespace

TEST_CASE("invariants of the flat model") {
  auto r = run({"invariants", data("trivial_k3.pair"), "--order", "2"});
  CHECK(r.exit_code == 0);
  const Json& K = r.report["result"]["normalized"]["K"];
  REQUIRE(K.size() == 3);
  for (const auto& Ki : K) CHECK(Ki[0][0]["terms"].empty());
  CHECK(r.report["result"]["gauge"]["transversal"] == "t");
  CHECK(r.report["schema_version"] == kReportSchemaVersion);
}

TEST_CASE("x'''' = x has K_0 = -1") {
  auto r = run({"invariants", data("xiv_eq_x.pair"), "--point", "t=0", "--order", "1"});
  CHECK(r.exit_code == 0);
  const Json& t = r.report["result"]["normalized"]["K"][0][0][0]["terms"];
  REQUIRE(t.size() == 1);
  CHECK(t[0]["coefficient"] == "-1");
  CHECK(t[0]["exponents"].empty());
  CHECK(r.summary.find("K_0=-1") != std::string::npos);
}

TEST_CASE("gating exit code") {
  auto r = run({"canonical-frame", data("geodesic.pair")});
  CHECK(r.exit_code == 5);
  CHECK(r.summary.find("k>2 or k=2 and m>1") != std::string::npos);
  CHECK(r.report["error"]["type"] == "GatingViolation");
}

TEST_CASE("other exit codes") {
  CHECK(run({"check-regular", data("degenerate.pair")}).exit_code == 3);
  CHECK(run({"check-regular", data("trivial_k3.pair")}).exit_code == 0);
  CHECK(run({"cartan", data("trivial_k3.pair"), "--order", "2", "--fiber-cap", "3"}).exit_code == 4);
  CHECK(run({"invariants", data("missing.pair")}).exit_code == 2);
  CHECK(run({"invariants", data("trivial_k3.pair"), "--order", "0"}).exit_code == 2);
  CHECK(run({"frobnicate", data("trivial_k3.pair")}).exit_code == 2);
  CHECK(run({"invariants", data("trivial_k3.pair"), "--bogus"}).exit_code == 2);

  const std::string bad = "bad_input.pair";
  std::ofstream(bad) << "pair \"b\" { kind = \"ode\" k = 3 m = 1 F[1] = \"x[0,1] +\" }\n";
  auto r = run({"invariants", bad});
  CHECK(r.exit_code == 2);
  CHECK(r.report["error"]["type"] == "ParseError");
  std::remove(bad.c_str());
}

TEST_CASE("reports are deterministic") {
  std::vector<std::string> args{"cartan", data("trivial_k2m2.pair"), "--order", "1", "--point", "t=1/2"};
  CHECK(dump_report(run(args).report) == dump_report(run(args).report));
  auto a = run({"invariants", data("xiv_eq_x.pair"), "--order", "2"});
  auto b = run({"invariants", data("xiv_eq_x.pair"), "--order", "2"});
  CHECK(dump_report(a.report) == dump_report(b.report));
  CHECK_FALSE(a.report.contains("timing_seconds"));
  CHECK(run({"check-regular", data("trivial_k3.pair"), "--timing"}).report.contains("timing_seconds"));
}

TEST_CASE("bundle commands") {
  auto r = run({"cartan", data("trivial_k3.pair"), "--order", "1"});
  CHECK(r.exit_code == 0);
  const Json& c = r.report["result"]["cartan"];
  CHECK(c["flat"] == true);
  CHECK(c["residual"].empty());
  CHECK(c["constants"]["[X,W[0,1]]"]["W[1,1]"] == "1");
  for (const auto& rel : c["relations"]) CHECK(rel["ok"] == true);
  auto f = run({"canonical-frame", data("trivial_k2m2.pair"), "--order", "1"});
  CHECK(f.exit_code == 0);
  CHECK(f.report["result"]["frame"]["rank_at_section"] == 13);
  CHECK(f.report["result"]["normalization"]["conditions_hold"] == true);
  CHECK_FALSE(f.report["result"].contains("cartan"));
}

TEST_CASE("checks and trivial-test") {
  auto l = run({"lemma2-check", data("xiv_eq_x.pair"), "--order", "2", "--scale", "1 + t - x[1,1]^2"});
  CHECK(l.exit_code == 0);
  CHECK(l.report["result"]["agree"] == true);
  auto s = run({"schwarzian-check", data("xiv_eq_x.pair"), "--scale", "2 + t^2 + x[0,1]"});
  CHECK(s.exit_code == 0);
  CHECK(s.report["result"]["samples"].size() == 10);
  CHECK(s.report["config"]["mode"] == "float");
  auto t = run({"trivial-test", data("xiv_eq_x.pair"), "--order", "1"});
  CHECK(t.report["result"]["flat"] == false);
  CHECK(t.report["result"]["points"].size() == 3);
  CHECK(t.report["result"]["witnesses"][0]["invariant"] == "K_0");
  auto e = run({"equation-type", data("trivial_k2m2.pair")});
  CHECK(e.exit_code == 0);
  CHECK(e.report["result"]["consistent"] == true);
}
