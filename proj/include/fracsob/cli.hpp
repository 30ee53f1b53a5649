#ifndef FRACSOB_CLI_HPP
#define FRACSOB_CLI_HPP

#include <fracsob/bbm.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracsob::cli
{

  /// Configuration error; `line` is 0 when the problem is not tied to a line.
  class ConfigError : public std::runtime_error
  {
  public:
    ConfigError(const std::string &msg, int line = 0);
    int line() const { return line_; }

  private:
    int line_;
  };

  enum class Command
  {
    seminorm,
    study,
    pointwise,
    embedding,
    detect,
    tails,
    double_limit,
    constant
  };

  std::string to_string(Command c);
  Command     command_from_string(const std::string &name);

  enum class OutputFormat
  {
    csv,
    json
  };

  struct RunConfig
  {
    Command command = Command::constant;
    int     dim = 0;

    /// Raw key/value pairs of the domain and function blocks (without prefix).
    std::map<std::string, std::string> domain;
    std::map<std::string, std::string> function;

    SeminormSpec         spec;
    std::vector<double>  s_sequence;
    QuadratureConfig     quad;
    StudyOptions         options;
    std::optional<Point> x;
    std::vector<int>     i_sequence;
    std::vector<double>  lambda_sequence;

    std::string  out_dir = "out";
    OutputFormat format = OutputFormat::csv;
    int          verbosity = 1;

    std::vector<std::string> warnings;
  };

  /**
   * Parses the flat `key = value` document described in the README. Lines
   * starting with '#' and blank lines are ignored. Unknown keys, duplicate
   * keys and out-of-range values raise ConfigError with the line number.
   */
  RunConfig parse_config(const std::string &text);

  /// Every resolved setting as ordered (key, value) pairs, defaults included.
  std::vector<std::pair<std::string, std::string>> resolved(const RunConfig &cfg);

  Domain       make_domain(const RunConfig &cfg);
  TestFunction make_function(const RunConfig &cfg);

  struct RunResult
  {
    int         exit_code = 0;
    std::string verdict;
  };

  /// Executes the command, writes results into cfg.out_dir and a summary to
  /// `log`. With `assert_verdict` the exit code is 0 only for the verdicts
  /// converged, bounded_suggests_w1p and satisfied.
  RunResult run(const RunConfig &cfg, bool assert_verdict, std::ostream &log);

} // namespace fracsob::cli

#endif
