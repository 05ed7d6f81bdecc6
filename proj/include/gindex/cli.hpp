#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace gindex::cli {

enum class Command { Psi, Measure, McRun, McRate, OraclePmf, OracleFluct };

std::string to_string(Command command);

// Resolved flag set of one invocation. Fields a command does not use keep
// their defaults so that equal invocations compare equal.
struct RunConfig {
  Command command = Command::Psi;
  double radius = 0.5;
  double fraction = 0.5;
  std::string grid = "0:1:0.01";
  std::vector<double> grid_points;
  int n = 100;
  double beta = 2.0;
  long sweeps = 10000;
  long burn_in = 1000;
  long thin = 100;
  std::uint64_t seed = 1;
  std::vector<int> sector;
  double sigma = 0.0;
  bool tune = true;
  double jump_prob = 0.2;
  double jump_sigma = 0.5;
  std::vector<int> n_list;
  int bins = 120;
  int threads = 1;
  std::string out_dir = ".";

  bool operator==(const RunConfig&) const = default;
};

// Raised for bad command lines; `flag` names the offending option when known.
class UsageError : public std::invalid_argument {
 public:
  UsageError(std::string flag, const std::string& message, bool domain = false)
      : std::invalid_argument(message), flag_(std::move(flag)), domain_(domain) {}
  const std::string& flag() const { return flag_; }
  bool is_domain_error() const { return domain_; }

 private:
  std::string flag_;
  bool domain_;
};

// --help / -h on the root or a subcommand; what() is the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Expands "a:b:h" to a, a+h, ... up to b (points within h/2 past b are
// dropped; a last point within rounding of b is snapped to b).
std::vector<double> expand_grid(const std::string& spec);

// argv excludes the program name: {"psi", "--radius", "0.5", ...}.
RunConfig parse_config(const std::vector<std::string>& args);

// Canonical argument list that parse_config maps back to `config`.
std::vector<std::string> to_args(const RunConfig& config);

// JSON text embedded in every output file.
std::string config_echo(const RunConfig& config);

// Re-parses the argument list stored in a config_echo.
RunConfig config_from_echo(const std::string& echo_json);

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDomain = 3,
  kRuntime = 4,
  kIo = 5,
};

struct ExecResult {
  int status = kOk;
  std::vector<std::string> files;
};

// Runs the command, writing its files under config.out_dir. Failures are
// reported on `err` as one JSON object and mapped to a nonzero status.
ExecResult execute(const RunConfig& config, std::ostream& err);

// Full front end: parse + execute, usage errors reported as JSON on `err`.
int run(const std::vector<std::string>& args, std::ostream& err);

// %.9g with negative zero printed as 0.
std::string format_number(double value);

}  // namespace gindex::cli
