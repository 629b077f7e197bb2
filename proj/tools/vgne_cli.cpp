#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vgne/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed variational GNE seeking: experiment runner"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run an experiment config, write trace/summary/instance");
  run->add_option("config", config, "INI config file")->required();

  auto* validate = app.add_subcommand("validate", "check parameters and step-size conditions");
  validate->add_option("config", config, "INI config file")->required();

  std::string trace, quantity, output;
  auto* extract = app.add_subcommand("extract", "print k,value pairs for one trace column");
  extract->add_option("trace", trace, "trace.csv")->required();
  extract->add_option("quantity", quantity, "column name")->required();
  extract->add_option("-o,--output", output, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vgne::kExitValidation;
  }

  if (*run) return vgne::run_experiment(config, std::cout, std::cerr);
  if (*validate) return vgne::validate_experiment(config, std::cout, std::cerr);

  if (output.empty()) return vgne::extract_quantity(trace, quantity, std::cout, std::cerr);
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot open " << output << " for writing\n";
    return vgne::kExitIo;
  }
  return vgne::extract_quantity(trace, quantity, out, std::cerr);
}
