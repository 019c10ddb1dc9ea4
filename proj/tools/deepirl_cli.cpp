// deepirl: generate worlds, train reward models, evaluate transfer, sweep demo counts.
//
// Exit codes: 0 success, 2 config error, 3 numeric divergence, 4 IO error.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "deepirl/errors.hpp"
#include "deepirl/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

int fail(int code, const char* kind, const std::exception& e) {
  std::fprintf(stderr, "deepirl: %s: %s\n", kind, e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum entropy deep inverse reinforcement learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string model_path;
  std::string output_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("-o,--output", output_dir, "override run.output_dir");
  };
  auto* generate = app.add_subcommand("generate", "write world, features and true reward");
  auto* train = app.add_subcommand("train", "train a reward model on sampled demonstrations");
  auto* eval = app.add_subcommand("eval", "evaluate a model snapshot on fresh worlds");
  auto* bench = app.add_subcommand("bench", "sweep the number of demonstrations");
  for (auto* sub : {generate, train, eval, bench}) add_common(sub);
  eval->add_option("-m,--model", model_path, "model snapshot from train")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    deepirl::ExperimentConfig cfg = deepirl::load_config(config_path);
    if (!output_dir.empty()) cfg.run.output_dir = output_dir;

    if (*generate) {
      deepirl::cmd_generate(cfg);
    } else if (*train) {
      const auto report = deepirl::cmd_train(cfg);
      if (!report.records.empty()) {
        const auto& last = report.records.back();
        std::printf("iterations %zu  loss %.6g  evd_train %.6g\n", last.iteration, last.loss,
                    last.evd_train);
      }
    } else if (*eval) {
      const auto result = deepirl::cmd_eval(cfg, model_path);
      std::printf("mean transfer evd %.6g over %zu worlds\n", result.mean, result.evd.size());
    } else if (*bench) {
      for (const auto& row : deepirl::cmd_bench(cfg))
        std::printf("n_demos %zu  evd_train %.6g  evd_transfer %.6g\n", row.n_demos, row.evd_train,
                    row.evd_transfer);
    }
  } catch (const deepirl::ConfigError& e) {
    return fail(kExitConfig, "config error", e);
  } catch (const deepirl::InvalidArgument& e) {
    return fail(kExitConfig, "config error", e);
  } catch (const deepirl::GenerationError& e) {
    return fail(kExitConfig, "config error", e);
  } catch (const deepirl::NumericDivergence& e) {
    return fail(kExitDivergence, "numeric divergence", e);
  } catch (const deepirl::IoError& e) {
    return fail(kExitIo, "io error", e);
  } catch (const std::exception& e) {
    return fail(1, "error", e);
  }
  return 0;
}
