#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hetq/cli/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hetq: many-server queues with random service rates"};
  app.require_subcommand(1);

  hetq::cli::Invocation inv;
  std::uint64_t seed = 0;
  std::size_t reps = 0;

  for (const auto& name : hetq::cli::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", inv.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--out", inv.out_dir, "output directory")->capture_default_str();
    sub->add_option("--set", inv.overrides, "override key=value (repeatable)");
    sub->add_option("--format", inv.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed, "root seed");
    sub->add_option("--reps", reps, "replications");
    sub->final_callback([&, sub, name] {
      inv.command = name;
      if (sub->count("--seed")) inv.seed = seed;
      if (sub->count("--reps")) inv.reps = reps;
    });
  }

  std::string manifest;
  std::string rerun_out = "rerun";
  auto* rerun = app.add_subcommand("rerun", "re-execute a manifest and compare checksums");
  rerun->add_option("manifest", manifest, "manifest.json path")->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", rerun_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (rerun->parsed()) return hetq::cli::rerun(manifest, rerun_out, std::cout, std::cerr);
  return hetq::cli::dispatch(inv, std::cout, std::cerr);
}
