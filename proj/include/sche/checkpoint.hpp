#pragma once

// Resumable trajectory state. Text format, 17 significant digits, so a
// read-back state is bit-identical to the one written.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "integrator.hpp"

namespace sche {

inline constexpr int kCheckpointVersion = 1;

/// Everything that must match for a checkpoint to belong to a run.
struct RunIdentity {
  int n_modes = 0;
  double tau = 0.0;
  double sigma = 0.0;
  DriftSpec drift;
  std::uint64_t seed = 0;
  std::uint64_t trajectory_id = 0;

  bool operator==(const RunIdentity&) const = default;
};

inline RunIdentity identity_of(const RunConfig& c) {
  return {c.n_modes, c.tau, c.sigma, c.drift, c.seed, c.trajectory_id};
}

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_checkpoint(std::ostream& out, const RunIdentity& id, const SchemeState& s) {
  if (s.coeffs.size() != static_cast<std::size_t>(id.n_modes))
    throw std::invalid_argument("write_checkpoint: state length does not match n_modes");
  using config_detail::format_number;
  out << "sche-checkpoint " << kCheckpointVersion << '\n'
      << "n_modes = " << id.n_modes << '\n'
      << "tau = " << format_number(id.tau) << '\n'
      << "sigma = " << format_number(id.sigma) << '\n'
      << "a0 = " << format_number(id.drift.a0) << '\n'
      << "a1 = " << format_number(id.drift.a1) << '\n'
      << "a2 = " << format_number(id.drift.a2) << '\n'
      << "a3 = " << format_number(id.drift.a3) << '\n'
      << "seed = " << id.seed << '\n'
      << "trajectory_id = " << id.trajectory_id << '\n'
      << "step_index = " << s.step_index << '\n'
      << "mass0 = " << format_number(s.mass0) << '\n'
      << "coeffs\n";
  for (double c : s.coeffs.coeffs) out << format_number(c) << '\n';
  out << "end\n";
}

inline void write_checkpoint(const std::filesystem::path& path, const RunIdentity& id, const SchemeState& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open checkpoint " + path.string() + " for writing");
  write_checkpoint(out, id, s);
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

/// Reads a checkpoint and checks it against `expected`.
inline SchemeState read_checkpoint(std::istream& in, const RunIdentity& expected) {
  std::string line;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw CheckpointError(std::string("truncated checkpoint: missing ") + what);
    return line;
  };
  {
    std::istringstream head(next("header"));
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != "sche-checkpoint") throw CheckpointError("not a checkpoint file");
    if (version != kCheckpointVersion)
      throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kCheckpointVersion) + ")");
  }
  auto field = [&](const char* key) {
    const std::string l = next(key);
    const std::string prefix = std::string(key) + " = ";
    if (!l.starts_with(prefix)) throw CheckpointError(std::string("checkpoint: expected '") + key + "'");
    return l.substr(prefix.size());
  };
  using config_detail::parse_integer;
  using config_detail::parse_number;
  RunIdentity id;
  SchemeState s;
  try {
    id.n_modes = parse_integer<int>(field("n_modes"));
    id.tau = parse_number(field("tau"));
    id.sigma = parse_number(field("sigma"));
    id.drift.a0 = parse_number(field("a0"));
    id.drift.a1 = parse_number(field("a1"));
    id.drift.a2 = parse_number(field("a2"));
    id.drift.a3 = parse_number(field("a3"));
    id.seed = parse_integer<std::uint64_t>(field("seed"));
    id.trajectory_id = parse_integer<std::uint64_t>(field("trajectory_id"));
    s.step_index = parse_integer<std::int64_t>(field("step_index"));
    s.mass0 = parse_number(field("mass0"));
    if (next("coeffs") != "coeffs") throw CheckpointError("checkpoint: expected 'coeffs'");
    if (id.n_modes < 2) throw CheckpointError("checkpoint: n_modes must be >= 2");
    s.coeffs.coeffs.reserve(static_cast<std::size_t>(id.n_modes));
    for (int j = 0; j < id.n_modes; ++j) s.coeffs.coeffs.push_back(parse_number(next("coefficient")));
    if (next("end marker") != "end") throw CheckpointError("checkpoint: expected 'end'");
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }

  std::string mismatch;
  auto check = [&](bool ok, const char* what) {
    if (!ok) mismatch += std::string(mismatch.empty() ? "" : ", ") + what;
  };
  check(id.n_modes == expected.n_modes, "n_modes");
  check(id.tau == expected.tau, "tau");
  check(id.sigma == expected.sigma, "sigma");
  check(id.drift == expected.drift, "drift coefficients");
  check(id.seed == expected.seed, "seed");
  check(id.trajectory_id == expected.trajectory_id, "trajectory_id");
  if (!mismatch.empty()) throw CheckpointError("checkpoint does not match the run configuration: " + mismatch);
  return s;
}

inline SchemeState read_checkpoint(const std::filesystem::path& path, const RunIdentity& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, expected);
}

}  // namespace sche
