#include <iostream>

#include "CLI11.hpp"
#include "pblab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Partial-backorder inventory toolkit"};
  app.require_subcommand(1);
  pblab::cli::RunRequest req;
  std::uint64_t seed = 0;
  std::string out;
  for (const auto& name : pblab::cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", req.config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pblab::cli::exit_config;
  }
  auto* sub = app.get_subcommands().front();
  req.subcommand = sub->get_name();
  if (sub->count("--seed")) req.seed = seed;
  if (sub->count("--out")) req.out = out;
  return pblab::cli::run(req, std::cout, std::cerr);
}
