#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

namespace medie::cli {

// Flags shared by every subcommand; each has a MEDIE_<NAME> environment
// fallback that the command line overrides.
struct Globals {
  std::string scheme;  // empty = builtin
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string config;
  bool strict = false;
};

// Exit status 1.
class StrictFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Runner = std::function<int()>;

// Adds all subcommands to `app`; the runner of the parsed subcommand is
// looked up by its App pointer after parsing.
std::map<const CLI::App*, Runner> register_commands(CLI::App& app, Globals& globals);

}  // namespace medie::cli
