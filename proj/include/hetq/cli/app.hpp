#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hetq/error.hpp"

namespace hetq::cli {

/// One command-line request.
struct Invocation {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  /// `key=value` overrides applied after the config file.
  std::vector<std::string> overrides;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
};

const std::vector<std::string>& commands();

/// Runs the command, writes its artifacts and manifest.json into out_dir.
/// Returns 0 on success, 2 on configuration errors, 3 on numerical or
/// stability errors. Messages go to `err`, a short report to `out`.
int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Re-executes the command recorded in a manifest into out_dir and compares
/// the artifact checksums. Returns 1 on any mismatch.
int rerun(const std::string& manifest_path, const std::string& out_dir, std::ostream& out, std::ostream& err);

int exit_code(ErrorCode code);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

}  // namespace hetq::cli
