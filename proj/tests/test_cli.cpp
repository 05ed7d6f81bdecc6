#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gindex/cli.hpp"

using namespace gindex::cli;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gindex_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Body rows of a CSV: everything after the echo comment and the header.
std::vector<std::string> csv_rows(const fs::path& path) {
  auto lines = lines_of(slurp(path));
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0].rfind("# config_echo: ", 0) == 0);
  return {lines.begin() + 2, lines.end()};
}

std::vector<std::string> with_out(std::vector<std::string> args, const fs::path& dir) {
  args.push_back("--out");
  args.push_back(dir.string());
  return args;
}

}  // namespace

TEST_CASE("grid expansion") {
  CHECK(expand_grid("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(expand_grid("0.75:0.75:1") == std::vector<double>{0.75});
  const auto fine = expand_grid("0:1:0.1");
  REQUIRE(fine.size() == 11);
  CHECK(fine.back() == 1.0);
  CHECK(fine[3] == Approx(0.3).epsilon(1e-15));
  // Endpoint within h/2 counts as inclusive; beyond it is dropped.
  CHECK(expand_grid("0:1.04:0.1").size() == 11);
  CHECK(expand_grid("0:1.06:0.1").size() == 12);
  CHECK_THROWS_AS(expand_grid("0:1"), UsageError);
  CHECK_THROWS_AS(expand_grid("0:1:0"), UsageError);
  CHECK_THROWS_AS(expand_grid("1:0:0.1"), UsageError);
  CHECK_THROWS_AS(expand_grid("a:b:c"), UsageError);
}

TEST_CASE("parse_config accepts the documented invocations") {
  const RunConfig psi = parse_config({"psi", "--radius", "0.5", "--grid", "0:1:0.25", "--beta", "2"});
  CHECK(psi.command == Command::Psi);
  CHECK(psi.radius == 0.5);
  CHECK(psi.grid_points == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});

  const RunConfig mc = parse_config(
      {"mc-run", "--n", "100", "--radius", "0.5", "--sector", "50", "--sweeps", "100000", "--seed", "42"});
  CHECK(mc.command == Command::McRun);
  CHECK(mc.n == 100);
  CHECK(mc.sector == std::vector<int>{50});
  CHECK(mc.sweeps == 100000);
  CHECK(mc.seed == 42);
  CHECK(mc.tune);

  const RunConfig fluct = parse_config({"oracle-fluct", "--radius", "0.5"});
  CHECK(fluct.n_list == std::vector<int>{100, 200, 400, 800, 1600, 3200, 6400});
  CHECK(parse_config({"oracle-fluct", "--radius", "0.5", "--n-list", "10,20"}).n_list ==
        std::vector<int>{10, 20});
  CHECK_FALSE(parse_config({"mc-rate", "--n", "4", "--radius", "0.5", "--no-tune"}).tune);
}

TEST_CASE("parse_config errors name the offending flag") {
  try {
    parse_config({"psi", "--radius", "1.5"});
    FAIL("expected a domain error");
  } catch (const UsageError& e) {
    CHECK(e.is_domain_error());
    CHECK(e.flag() == "--radius");
  }
  try {
    parse_config({"psi", "--radius", "0.5", "--bogus", "1"});
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    CHECK_FALSE(e.is_domain_error());
    CHECK(e.flag() == "--bogus");
  }
  try {
    parse_config({"oracle-pmf", "--radius", "0.5"});
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    CHECK(e.flag() == "--n");
  }
  CHECK_THROWS_AS(parse_config({"measure", "--radius", "0.5", "--p", "1.5"}), UsageError);
  CHECK_THROWS_AS(parse_config({"mc-run", "--n", "10", "--radius", "0.5", "--sector", "3,x"}),
                  UsageError);
  CHECK_THROWS_AS(parse_config({"nonsense"}), UsageError);
  CHECK_THROWS_AS(parse_config({}), UsageError);
  CHECK_THROWS_AS(parse_config({"psi", "--help"}), HelpRequested);
}

TEST_CASE("run maps failures to exit codes and JSON errors") {
  std::ostringstream err;
  CHECK(run({"psi", "--radius", "1.5"}, err) == kDomain);
  const auto j = nlohmann::json::parse(err.str());
  CHECK(j.at("error") == "domain");
  CHECK(j.at("flag") == "--radius");

  std::ostringstream err2;
  CHECK(run({"psi", "--radius", "0.5", "--unknown"}, err2) == kUsage);
  CHECK(nlohmann::json::parse(err2.str()).at("error") == "usage");

  // Sector outside [0, n] is rejected by the chain, not the parser.
  const fs::path dir = scratch_dir("infeasible");
  std::ostringstream err3;
  CHECK(run(with_out({"mc-run", "--n", "4", "--radius", "0.5", "--sector", "9"}, dir), err3) == kRuntime);
  CHECK(nlohmann::json::parse(err3.str()).at("error") == "configuration");

  const fs::path blocker = scratch_dir("io") / "file";
  std::ofstream(blocker) << "x";
  std::ostringstream err4;
  CHECK(run(with_out({"oracle-pmf", "--n", "2", "--radius", "1"}, blocker), err4) == kIo);
}

TEST_CASE("psi at the critical fraction") {
  const fs::path dir = scratch_dir("psi");
  std::ostringstream err;
  REQUIRE(run(with_out({"psi", "--radius", "0.5", "--grid", "0.75:0.75:1"}, dir), err) == kOk);
  const auto lines = lines_of(slurp(dir / "psi.csv"));
  REQUIRE(lines.size() == 3);
  CHECK(lines[1] == "p,psi,ld_log_prob");
  CHECK(lines[2] == "0.75,0,0");
}

TEST_CASE("oracle-pmf rows") {
  const fs::path dir = scratch_dir("pmf");
  std::ostringstream err;
  REQUIRE(run(with_out({"oracle-pmf", "--n", "2", "--radius", "1"}, dir), err) == kOk);
  const auto rows = csv_rows(dir / "oracle_pmf.csv");
  REQUIRE(rows.size() == 3);
  const double expected[3] = {0.5136057, 0.4314474, 0.0549469};
  for (int k = 0; k < 3; ++k) {
    const auto comma = rows[static_cast<std::size_t>(k)].find(',');
    CHECK(std::stoi(rows[static_cast<std::size_t>(k)].substr(0, comma)) == k);
    CHECK(std::stod(rows[static_cast<std::size_t>(k)].substr(comma + 1)) == Approx(expected[k]).epsilon(1e-6));
  }
  const auto moments = nlohmann::json::parse(slurp(dir / "oracle_moments.json"));
  CHECK(moments.at("mean").get<double>() == Approx(0.5413411).epsilon(1e-6));
  CHECK(moments.contains("config_echo"));
}

TEST_CASE("every output embeds an echo that reproduces the run") {
  const std::vector<std::vector<std::string>> invocations = {
      {"psi", "--radius", "0.3", "--grid", "0:1:0.1", "--beta", "1"},
      {"measure", "--radius", "0.5", "--p", "0.9", "--bins", "30"},
      {"mc-run", "--n", "8", "--radius", "0.6", "--sector", "3,4", "--sweeps", "200", "--burn-in", "20",
       "--thin", "20", "--seed", "5", "--bins", "10"},
      {"mc-rate", "--n", "4", "--radius", "0.7", "--sweeps", "300", "--burn-in", "20", "--seed", "3"},
      {"oracle-pmf", "--n", "30", "--radius", "0.8"},
      {"oracle-fluct", "--radius", "0.5", "--n-list", "10,20,40"},
  };
  int case_id = 0;
  for (const auto& args : invocations) {
    CAPTURE(args[0]);
    const fs::path first = scratch_dir("echo_a" + std::to_string(case_id));
    const fs::path second = scratch_dir("echo_b" + std::to_string(case_id));
    ++case_id;

    std::ostringstream err;
    const RunConfig config = parse_config(with_out(args, first));
    const ExecResult result = execute(config, err);
    REQUIRE(result.status == kOk);
    REQUIRE_FALSE(result.files.empty());

    for (const auto& file : result.files) {
      const std::string text = slurp(file);
      std::string echo;
      if (fs::path(file).extension() == ".csv") {
        const std::string first_line = lines_of(text).front();
        echo = first_line.substr(std::string("# config_echo: ").size());
      } else {
        echo = nlohmann::json::parse(text).at("config_echo").dump();
      }
      RunConfig replay = config_from_echo(echo);
      replay.out_dir = config.out_dir;
      CHECK(replay == config);
    }

    // Re-running the echoed configuration elsewhere gives identical bytes.
    RunConfig again = config_from_echo(config_echo(config));
    again.out_dir = second.string();
    REQUIRE(execute(again, err).status == kOk);
    for (const auto& file : result.files) {
      const fs::path name = fs::path(file).filename();
      CHECK(slurp(first / name) == slurp(second / name));
    }
  }
}

TEST_CASE("mc-run and mc-rate file layout") {
  const fs::path dir = scratch_dir("mc");
  std::ostringstream err;
  REQUIRE(run(with_out({"mc-run", "--n", "6", "--radius", "0.5", "--sector", "2", "--sweeps", "100",
                        "--burn-in", "10", "--thin", "50", "--seed", "1"},
                       dir),
              err) == kOk);
  const auto snaps = lines_of(slurp(dir / "mc_snapshots.csv"));
  CHECK(snaps[1] == "sweep,particle,re,im");
  CHECK(snaps.size() == 2 + 2 * 6);
  const auto stats = nlohmann::json::parse(slurp(dir / "mc_stats.json"));
  for (const char* key : {"acceptance_rate", "mean_energy", "occupancy", "config_echo"}) {
    CHECK(stats.contains(key));
  }
  CHECK(stats.at("occupancy").at("2").get<double>() == 1.0);

  REQUIRE(run(with_out({"mc-rate", "--n", "4", "--radius", "0.7", "--sweeps", "300", "--seed", "2",
                        "--threads", "2"},
                       dir),
              err) == kOk);
  const auto rows = csv_rows(dir / "mc_rate.csv");
  CHECK(rows.size() == 5);
  CHECK(lines_of(slurp(dir / "mc_rate.csv"))[1] == "p,psi_hat,psi_theory");
}

TEST_CASE("format_number") {
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(0.5136056790) == "0.513605679");
  CHECK(format_number(1e-20) == "1e-20");
}
