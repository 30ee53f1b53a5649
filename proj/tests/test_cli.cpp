#include <fracsob/cli.hpp>

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fracsob;
using namespace fracsob::cli;

namespace
{
  std::string slurp(const std::filesystem::path &p)
  {
    std::ifstream      in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  std::filesystem::path scratch(const std::string &name)
  {
    auto dir = std::filesystem::temp_directory_path() / ("fracsob_test_cli_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
  }

  const char *disk_study = R"(command = study
domain.kind = ball
domain.center = 0, 0
domain.radius = 1
function.name = linear
function.a = 1, 0
spec.p = 2
spec.q = 2
spec.tau = 0.5
quad.outer_radial = 16
quad.outer_angular = 32
)";

  int run_tool(const std::filesystem::path &cfg, const std::string &extra)
  {
    const std::string cmd = std::string(FRACSOB_CLI_PATH) + " --config " + cfg.string() + " " + extra + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
} // namespace

TEST_CASE("minimal constant document")
{
  const auto cfg = parse_config("command = constant\nN = 2\nspec.p = 2\nspec.q = 2\n");
  CHECK(cfg.command == Command::constant);
  CHECK(cfg.dim == 2);
  std::ostringstream log;
  RunConfig          c = cfg;
  c.out_dir = scratch("constant").string();
  c.verbosity = 0;
  run(c, true, log);
  CHECK(log.str().find("1.5707963267948966") != std::string::npos);
}

TEST_CASE("configuration errors carry line numbers")
{
  auto line_of = [](const std::string &text) {
    try
      {
        (void)parse_config(text);
      }
    catch (const ConfigError &e)
      {
        return e.line();
      }
    return -1;
  };
  CHECK(line_of("command = constant\nN = 2\nspec.tau = 1.5\n") == 3);
  try
    {
      (void)parse_config("command = constant\nN = 2\nspec.tau = 1.5\n");
    }
  catch (const ConfigError &e)
    {
      CHECK(std::string(e.what()).find("(0, 1)") != std::string::npos);
    }
  CHECK(line_of("command = constant\n# note\nwidth = 3\n") == 3);
  CHECK(line_of("command = constant\nN = 2\nN = 3\n") == 3);
  CHECK(line_of("command = constant\nN = 2\nspec.p = two\n") == 3);
  CHECK(line_of("command = wobble\n") == 1);
  CHECK(line_of("command = constant\nN = 2\nno equals sign\n") == 3);
  CHECK(line_of("N = 2\n") == 0);
  CHECK(line_of(std::string(disk_study) + "domain.spacing = 1\n") == 12);
  CHECK(line_of(std::string(disk_study) + "spec.variant = hat\n") > 0);
  CHECK(line_of("command = study\ndomain.kind = strip\ndomain.axis = 1\ndomain.half_width = 1\nN = 2\n"
                "function.name = linear\nfunction.a = 1,0\n") > 0);
  CHECK(line_of("command = embedding\nN = 2\ndomain.kind = ball\ndomain.center = 0,0\ndomain.radius = 1\n"
                "function.name = linear\nfunction.a = 1,0\n") >= 0);
}

TEST_CASE("defaults and warnings")
{
  const auto study = parse_config(disk_study);
  REQUIRE(study.s_sequence.size() == 10);
  CHECK(study.s_sequence.front() == 0.5);
  CHECK(study.s_sequence.back() == 1.0 - std::ldexp(1.0, -10));
  CHECK(study.warnings.empty());
  const auto detect = parse_config(std::string(disk_study).replace(0, 15, "command = detect"));
  CHECK(detect.s_sequence == detector_s_sequence());
  const auto odd = parse_config(std::string(disk_study) + "spec.s_sequence = 0.5, 0.9\n" + "N = 2\n")
                     .spec;
  CHECK(odd.p == 2.0);
  std::string rough = disk_study;
  rough.replace(rough.find("spec.p = 2"), 10, "spec.p = 1.5");
  rough.replace(rough.find("spec.q = 2"), 10, "spec.q = 7");
  const auto outside = parse_config(rough);
  CHECK_FALSE(outside.warnings.empty());
  const auto gauss = parse_config("command = seminorm\nN = 2\ndomain.kind = ball\ndomain.center = 0,0\n"
                                  "domain.radius = 1\nfunction.name = gaussian\n");
  CHECK(gauss.function.at("width") == "0.40000000000000002");
  bool has_tau = false;
  for (const auto &[k, v] : resolved(gauss))
    has_tau = has_tau || (k == "spec.tau" && v == "0.5");
  CHECK(has_tau);
}

TEST_CASE("study writes a table with one row per s and a converged verdict")
{
  RunConfig cfg = parse_config(disk_study);
  cfg.out_dir = scratch("study").string();
  std::ostringstream log;
  const auto         res = run(cfg, true, log);
  CHECK(res.exit_code == 0);
  CHECK(res.verdict == "converged");

  std::istringstream csv(slurp(std::filesystem::path(cfg.out_dir) / "results.csv"));
  std::string        line;
  std::getline(csv, line);
  CHECK(line == "s,one_minus_s,raw_p_power,scaled,reference,rel_error,verdict");
  int rows = 0;
  while (std::getline(csv, line))
    ++rows;
  CHECK(rows == 10);

  const auto report = nlohmann::json::parse(slurp(std::filesystem::path(cfg.out_dir) / "report.json"));
  CHECK(report["verdict"] == "converged");
  CHECK(report["result"]["scaled_values"].size() == 10);
  CHECK(report["config"]["spec.tau"] == "0.5");
}

TEST_CASE("command line tool")
{
  const auto dir = scratch("tool");
  std::ofstream(dir / "k.cfg") << "command = constant\nN = 2\nspec.p = 2\nspec.q = 2\n";
  CHECK(run_tool(dir / "k.cfg", "--out " + (dir / "k").string()) == 0);
  CHECK(slurp(dir / "k" / "results.csv").find("1.5707963267948966") != std::string::npos);

  std::ofstream(dir / "bad.cfg") << "command = constant\nN = 2\nspec.tau = 1.5\n";
  CHECK(run_tool(dir / "bad.cfg", "") == 2);
  CHECK(run_tool(dir / "missing.cfg", "") != 0);

  std::ofstream(dir / "chi.cfg") << "command = detect\nN = 2\ndomain.kind = axis_box\ndomain.lo = -0.5, -0.5\n"
                                    "domain.hi = 0.5, 0.5\nfunction.name = halfspace_indicator\nspec.p = 2\n"
                                    "spec.q = 2\nspec.s_sequence = 0.5, 0.75, 0.875\nquad.resolution = 16\n";
  CHECK(run_tool(dir / "chi.cfg", "--assert --out " + (dir / "chi").string()) != 0);
  CHECK(run_tool(dir / "chi.cfg", "--out " + (dir / "chi2").string()) == 0);
}

TEST_CASE("identical runs give identical files")
{
  const auto dir = scratch("determinism");
  std::ofstream(dir / "g.cfg") << "command = study\nN = 2\ndomain.kind = ball\ndomain.center = 0,0\ndomain.radius = 1\n"
                                  "function.name = gaussian\nspec.s_sequence = 0.5, 0.9\nquad.outer = mc\n"
                                  "quad.outer_samples = 400\nquad.seed = 5\n";
  REQUIRE(run_tool(dir / "g.cfg", "--out " + (dir / "a").string() + " --threads 1") == 0);
  REQUIRE(run_tool(dir / "g.cfg", "--out " + (dir / "b").string() + " --threads 3") == 0);
  CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));
  const auto a = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  auto       b = nlohmann::json::parse(slurp(dir / "b" / "report.json"));
  CHECK(a["result"] == b["result"]);
  REQUIRE(run_tool(dir / "g.cfg", "--out " + (dir / "c").string() + " --seed 6") == 0);
  CHECK(slurp(dir / "a" / "results.csv") != slurp(dir / "c" / "results.csv"));
}
