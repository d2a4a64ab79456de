#include <doctest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include "scratch.hpp"
#include "tradenet/csv.hpp"

namespace {

const std::string kCli = TRADENET_CLI;

/// Runs the CLI with `args`, output captured to `log`, and returns its exit code.
int cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("cli verbs succeed on a generated sample") {
  testutil::ScratchDir dir("cli_ok");
  const auto log = dir / "log.txt";
  const auto data = dir / "data";
  const auto config = data / "config.ini";

  CHECK(cli("--help", log) == 0);
  CHECK(cli("--version", log) == 0);
  CHECK(testutil::slurp(log).find("tradenet") != std::string::npos);

  REQUIRE(cli("synth --countries 10 --first-year 2010 --last-year 2015 --incomplete 2 --seed 3 --out-dir " + q(data),
              log) == 0);
  CHECK(std::filesystem::exists(config));

  CHECK(cli("validate -c " + q(config), log) == 0);
  CHECK(testutil::slurp(log).find("config ok") != std::string::npos);

  const auto out = dir / "out";
  REQUIRE(cli("run -c " + q(config) + " --out-dir " + q(out) + " --seed 9 --filter off", log) == 0);
  CHECK(testutil::slurp(log).find("panel: 8 countries, 48 rows") != std::string::npos);
  CHECK(std::filesystem::exists(out / "manifest.csv"));
  CHECK(testutil::slurp(out / "manifest.csv").find("seed,9,,") != std::string::npos);

  const auto table = dir / "c2012.csv";
  CHECK(cli("centrality -c " + q(config) + " --year 2012 -o " + q(table), log) == 0);
  CHECK(tradenet::csv::read(table).rows.size() == 10);

  const auto est = dir / "est.csv";
  CHECK(cli("estimate --panel " + q(out / "panel.csv") +
                " --dependent s_out --estimator fixed_effects --regressors rgdpc,hc -o " + q(est),
            log) == 0);
  CHECK(testutil::slurp(est).find("rgdpc") != std::string::npos);
}

TEST_CASE("cli validation failures exit with 2") {
  testutil::ScratchDir dir("cli_validation");
  const auto log = dir / "log.txt";
  const auto data = dir / "data";

  CHECK(cli("run --no-such-flag", log) == 2);
  CHECK(cli("", log) == 2);
  CHECK(cli("validate -c " + q(dir / "missing.ini"), log) == 2);
  CHECK(cli("synth --countries 3 --out-dir " + q(data), log) == 2);
  CHECK(testutil::slurp(log).find("validation error") != std::string::npos);

  REQUIRE(cli("synth --countries 10 --first-year 2010 --last-year 2015 --out-dir " + q(data), log) == 0);
  CHECK(cli("run -c " + q(data / "config.ini") + " --filter maybe", log) == 2);
  CHECK(cli("run -c " + q(data / "config.ini") + " --set network.colour=red --out-dir " + q(dir / "o"), log) == 2);
  std::filesystem::remove(data / "tariffs.csv");
  CHECK(cli("validate -c " + q(data / "config.ini"), log) == 2);
  CHECK(cli("run -c " + q(data / "config.ini") + " --out-dir " + q(dir / "o"), log) == 2);
  CHECK_FALSE(std::filesystem::exists(dir / "o"));
}

TEST_CASE("cli computation failures exit with 3") {
  testutil::ScratchDir dir("cli_computation");
  const auto log = dir / "log.txt";
  const auto data = dir / "data";
  REQUIRE(cli("synth --countries 10 --first-year 2010 --last-year 2015 --incomplete 0 --out-dir " + q(data), log) ==
          0);

  auto table = tradenet::csv::read(data / "macro.csv");
  const auto col = *table.column("wgi_voice");
  std::string text;
  for (std::size_t i = 0; i < table.header.size(); ++i) text += (i ? "," : "") + table.header[i];
  text += "\n";
  for (auto& row : table.rows) {
    row.fields[col] = "0.5";
    for (std::size_t i = 0; i < row.fields.size(); ++i) text += (i ? "," : "") + row.fields[i];
    text += "\n";
  }
  testutil::spit(data / "macro.csv", text);
  CHECK(cli("run -c " + q(data / "config.ini") + " --out-dir " + q(dir / "o"), log) == 3);
  CHECK(testutil::slurp(log).find("indices: ") != std::string::npos);
}
