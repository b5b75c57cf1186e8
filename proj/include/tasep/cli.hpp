#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tasep/core.hpp"
#include "tasep/experiments.hpp"

// Experiment harness behind the `tasep` command line tool.
//
// Config files are flat key-value text:
//   line    := blank | comment | key '=' value [comment]
//   comment := '#' anything
//   list values are comma separated; M accepts "inf".
// Precedence: command-line flags > config file > built-in defaults.
namespace tasep::cli {

inline constexpr const char* version = "1.0.0";

struct ConfigError : Error {
    using Error::Error;
};

struct ExperimentConfig {
    std::string command;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    std::string str(const std::string& key) const;
    double real(const std::string& key) const;
    long integer(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    std::vector<long> integers(const std::string& key) const;

    // Sorted key=value lines of everything that can change results (not out/workers).
    std::string canonical() const;
    // FNV-1a 64 of canonical(), hex.
    std::string hash() const;
};

std::map<std::string, std::string> parse_key_values(std::istream& is);
std::map<std::string, std::string> read_config_file(const std::string& path);

const std::vector<std::string>& commands();
std::map<std::string, std::string> defaults(const std::string& command);

// Defaults, then the file (if non-empty path), then overrides. Unknown keys and
// invalid values throw ConfigError.
ExperimentConfig make_config(const std::string& command, const std::string& file,
                             const std::map<std::string, std::string>& overrides);

struct Output {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<experiments::Check> checks;
    std::map<std::string, std::string> quadrature;

    bool pass() const;
};

std::vector<Output> cmd_simulate(const ExperimentConfig&);
std::vector<Output> cmd_exact(const ExperimentConfig&);
std::vector<Output> cmd_compare(const ExperimentConfig&);
std::vector<Output> cmd_tables(const ExperimentConfig&);
std::vector<Output> cmd_diagram(const ExperimentConfig&);

std::vector<Output> run_command(const ExperimentConfig&);

// CSV: '#'-prefixed metadata lines (tool, version, command, config_hash, seed,
// quadrature, config echo, checks) followed by the header row and data rows.
void write_csv(const ExperimentConfig&, const Output&, std::ostream&);
// JSON mirror, schema "tasep.output/1".
void write_json(const ExperimentConfig&, const Output&, std::ostream&);

// Runs the command, writes <out>/<name>.csv and .json for every output, prints a
// line per check to `log`. Returns 0 when every check passes, 1 otherwise.
int execute(const ExperimentConfig&, std::ostream& log);

}  // namespace tasep::cli
