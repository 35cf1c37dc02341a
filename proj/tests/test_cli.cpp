#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "windclear/formulations.hpp"

namespace fs = std::filesystem;
using namespace windclear;

namespace {

std::string case_path(const char* name) { return std::string(WINDCLEAR_CASE_DIR) + "/" + name; }

int run(const std::string& args, const std::string& log = "/dev/null") {
  std::string cmd = std::string(WINDCLEAR_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("wc_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int counter;
};
int TempDir::counter = 0;

}  // namespace

TEST_CASE("solve writes reloadable artifacts and a table") {
  TempDir td;
  std::string log = (td.path / "out.txt").string();
  int rc = run("solve " + case_path("illustrative.json") + " --model ldt-cc --table --out " +
                   td.path.string(),
               log);
  CHECK(rc == 0);
  std::string table = slurp(log);
  CHECK(table.find("model") != std::string::npos);
  CHECK(table.find("75.00") != std::string::npos);

  ClearingResult r = ClearingResult::from_json(slurp(td.path / "result.json"));
  CHECK(r.model == ModelKind::LDTCC);
  SystemCase c = load_case(case_path("illustrative.json"));
  r.validate(c);
  CHECK(slurp(td.path / "prices.json").find("rho") != std::string::npos);
  CHECK(slurp(td.path / "settlement.csv").find("producer,") == 0);
  CHECK(slurp(td.path / "manifest.json").find("case_hash") != std::string::npos);
}

TEST_CASE("sorted stable json output") {
  TempDir td;
  std::string log = (td.path / "o.json").string();
  CHECK(run("solve " + case_path("illustrative.json") + " --model cc --json --out " +
                td.path.string(),
            log) == 0);
  std::string j = slurp(log);
  // keys appear in sorted order
  CHECK(j.find("\"alpha\"") < j.find("\"duals\""));
  CHECK(j.find("\"duals\"") < j.find("\"p\""));
}

TEST_CASE("exit codes: invalid case, infeasible, missing file") {
  TempDir td;
  CHECK(run("solve /nonexistent.json --model cc") == 1);

  // infeasible: net demand above capacity
  SystemCase c = load_case(case_path("illustrative.json"));
  c.total_demand = 600.0;
  fs::path bad = td.path / "infeasible.json";
  std::ofstream(bad) << serialize_case(c);
  CHECK(run("solve " + bad.string() + " --model cc --out " + td.path.string()) == 2);

  CHECK(run("compare " + case_path("illustrative.json") + " --models nope") == 1);
}

TEST_CASE("two-sided illustrative case remains solvable and exits zero") {
  TempDir td;
  CHECK(run("solve " + case_path("illustrative.json") + " --model cc --min-side --out " +
            td.path.string()) == 0);
}

TEST_CASE("evaluate round trip with hash checking") {
  TempDir td;
  CHECK(run("solve " + case_path("illustrative.json") + " --model ldt-wcc --out " +
            td.path.string()) == 0);
  std::string log = (td.path / "summary.txt").string();
  int rc = run("evaluate " + case_path("illustrative.json") + " " +
                   (td.path / "result.json").string() + " --scenarios 100 --seed 7 --summary --out " +
                   td.path.string(),
               log);
  CHECK(rc == 0);
  CHECK(slurp(log).find("mean=") != std::string::npos);
  CHECK(slurp(td.path / "report.csv").find("scenario,") == 0);

  // zero scenarios is a valid empty report
  CHECK(run("evaluate " + case_path("illustrative.json") + " " +
            (td.path / "result.json").string() + " --scenarios 0 --out " + td.path.string()) == 0);

  // mismatched case
  CHECK(run("evaluate " + case_path("isone8.json") + " " + (td.path / "result.json").string() +
            " --scenarios 10 --out " + td.path.string()) == 1);
}

TEST_CASE("compare prints the side-by-side tables") {
  TempDir td;
  std::string log = (td.path / "cmp.txt").string();
  CHECK(run("compare " + case_path("illustrative.json") + " --models cc,ldt-wcc,ldt-cc --out " +
                td.path.string(),
            log) == 0);
  std::string out = slurp(log);
  CHECK(out.find("cc") != std::string::npos);
  CHECK(out.find("ldt-wcc") != std::string::npos);
  CHECK(out.find("ldt-cc") != std::string::npos);
  CHECK(out.find("total_cost") != std::string::npos);
  CHECK(slurp(td.path / "compare.csv").find("model,pi,rho,chi,total_cost") == 0);

  std::string nlog = (td.path / "net.txt").string();
  CHECK(run("compare " + case_path("threenode.json") + " --network --out " + td.path.string(),
            nlog) == 0);
  CHECK(slurp(nlog).find("lmp") != std::string::npos);
}
