#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deepkrein/errors.hpp"
#include "deepkrein/experiment.hpp"
#include "deepkrein/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDomain = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace deepkrein;
  CLI::App app{"Deep networks as Krein-space kernel machines: flatten, kernels, training, bounds"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trunc;

  const std::map<std::string, std::string> help{
      {"flatten", "build the flat feature map, metric and weights; check them against the network"},
      {"kernel", "Gram matrix and spectrum of the network kernel on the dataset"},
      {"train-net", "train the network by gradient descent"},
      {"train-ksvm", "train the equivalent kernel machine"},
      {"compare", "train both and compare predictions, Grams and bounds"},
      {"bounds", "Rademacher complexity bounds and an empirical estimate"},
      {"sparsity", "flat-weight sparsity profile against its bound"}};
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_path, "report path; auxiliary files are written next to it");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--trunc", trunc, "overrides the config truncation degree")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunContext ctx{load_config(config_path), std::nullopt};
    if (seed) ctx.config.seed = *seed;
    if (trunc) ctx.config.truncation = *trunc;
    std::optional<std::filesystem::path> report;
    if (!out_path.empty()) {
      report = out_path;
    } else if (ctx.config.report) {
      report = std::filesystem::path(*ctx.config.report).is_absolute()
                   ? std::filesystem::path(*ctx.config.report)
                   : ctx.config.base_dir / *ctx.config.report;
    }
    ctx.out = report;
    const std::string text = run_subcommand(command, ctx).dump(2) + "\n";
    if (report) {
      atomic_write(*report, text);
    } else {
      std::cout << text;
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    std::cerr << "deepkrein " << command << ": invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "deepkrein " << command << ": numerical domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "deepkrein " << command << ": " << e.what() << '\n';
    return kExitFailure;
  }
}
