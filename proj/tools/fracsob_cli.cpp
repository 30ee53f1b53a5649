#include <fracsob/cli.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char **argv)
{
  CLI::App app{"Fractional Sobolev seminorm engine"};

  std::string                  config_path;
  std::optional<std::string>   out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int>           threads;
  bool                         assert_verdict = false;

  app.add_option("-c,--config", config_path, "config file (key = value lines)")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "output directory, overrides output.path");
  app.add_option("--seed", seed, "overrides quad.seed");
  app.add_option("--threads", threads, "overrides quad.threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_flag("--assert", assert_verdict, "exit with 1 unless the verdict is converged, bounded or satisfied");

  CLI11_PARSE(app, argc, argv);

  try
    {
      std::ifstream in(config_path);
      if (!in)
        throw std::runtime_error("cannot read " + config_path);
      std::ostringstream text;
      text << in.rdbuf();

      fracsob::cli::RunConfig cfg = fracsob::cli::parse_config(text.str());
      if (out_dir)
        cfg.out_dir = *out_dir;
      if (seed)
        cfg.quad.seed = *seed;
      if (threads)
        cfg.quad.threads = *threads;

      return fracsob::cli::run(cfg, assert_verdict, std::cout).exit_code;
    }
  catch (const fracsob::cli::ConfigError &e)
    {
      std::cerr << "config error: " << e.what() << '\n';
      return 2;
    }
  catch (const std::exception &e)
    {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
}
