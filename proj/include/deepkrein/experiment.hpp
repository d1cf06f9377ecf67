#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepkrein/analysis.hpp"
#include "deepkrein/kreinkernel.hpp"
#include "deepkrein/netcore.hpp"

namespace deepkrein {

using Json = nlohmann::ordered_json;

/// A parsed and validated experiment file. See configs/README.md for the
/// schema; unknown keys are rejected.
struct ExperimentConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  Architecture arch{1, {1}, {ActivationSpec::linear()}};
  std::optional<double> reg_scale;
  std::optional<std::string> dataset;
  Loss loss = Loss::Squared;
  double lambda = 0.01;
  int truncation = 8;
  std::uint64_t seed = 0;
  int train_steps = 500;
  double train_step_size = 0.05;
  std::string ksvm_solver = "eigen";
  int ksvm_steps = 2000;
  double ksvm_step_size = 0.01;
  double ksvm_init_scale = 0.0;
  KernelVariant kernel_variant = KernelVariant::Krein;
  std::optional<std::string> weights;
  std::optional<double> bounds_r_nn;
  int bounds_trials = 200;
  int bounds_hypothesis_draws = 200;
  double lipschitz_interval = kInfinity;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  std::optional<std::string> report;

  /// The normalized config with every default filled in.
  Json echo() const;
};

/// Throws ValidationError with line:column for syntax errors and a JSON
/// pointer for schema errors.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Named derivation paths for the config seed.
namespace seed_stream {
inline constexpr std::uint64_t kNetworkInit = 11;
inline constexpr std::uint64_t kKsvm = 12;
inline constexpr std::uint64_t kRademacher = 13;
}  // namespace seed_stream

/// Auxiliary files are written next to `out` as <out>.<suffix>.
struct RunContext {
  ExperimentConfig config;
  std::optional<std::filesystem::path> out;
};

Json run_flatten(const RunContext& ctx);
Json run_kernel(const RunContext& ctx);
Json run_train_net(const RunContext& ctx);
Json run_train_ksvm(const RunContext& ctx);
Json run_compare(const RunContext& ctx);
Json run_bounds(const RunContext& ctx);
Json run_sparsity(const RunContext& ctx);

const std::vector<std::string>& subcommands();
Json run_subcommand(const std::string& name, const RunContext& ctx);

}  // namespace deepkrein
