#pragma once

#include <atomic>
#include <iosfwd>
#include <memory>
#include <string>

#include <json.hpp>

#include "synth/strategy.hpp"

namespace synth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitContract = 4;

// Resolved invocation: command name plus every setting at its final value.
// The id hashes (command, config); outputs reference it, and in
// iteration-budget mode the manifest plus the inputs reproduce the run
// byte-for-byte.
struct Manifest {
  std::string command;
  nlohmann::json config;
  std::string id;
  std::string created;  // wall clock, not part of the id

  nlohmann::json to_json() const;
};

Manifest make_manifest(const std::string& command, const nlohmann::json& config);

// "ga", "random", or the path of an s-expression program file.
std::unique_ptr<Strategy> resolve_strategy(const std::string& spec, uint64_t seed);

// Cooperative interruption; synth flushes its checkpoint and exits cleanly
// when this is set.
std::atomic<bool>& interrupt_flag();

// Dispatches to the subcommand implementation and maps exceptions onto exit
// statuses (2 usage, 3 I/O, 4 contract violation).
int run(const Manifest& manifest, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace synth::cli
