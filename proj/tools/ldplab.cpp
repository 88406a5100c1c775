// ldplab <subcommand> --config <file> [--out <dir>] [--workers K]
//
// Exit codes: 0 success, 2 malformed or invalid config (message is
// file:line anchored), 3 numerical failure (trace.json written to the output
// directory).

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ldplab/experiment.hpp"

namespace fs = std::filesystem;
using namespace ldplab;

namespace {

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-deviations laboratory for SDEs driven by Levy noise"};
  app.require_subcommand(1);
  std::string config, out_dir;
  int workers = 0;
  for (const auto& name : experiment::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: config output_dir, else ldplab_out)");
    sub->add_option("--workers", workers, "sampling threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  std::optional<experiment::ConfigSource> src;
  try {
    src = experiment::ConfigSource::from_file(config);
  } catch (const experiment::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  if (out_dir.empty()) {
    const auto& r = src->root();
    out_dir = r.contains("output_dir") && r["output_dir"].is_string() ? r["output_dir"].get<std::string>() : "ldplab_out";
  }

  auto prepare = [&] {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir + ": " + ec.message());
  };
  auto write_trace = [&](const std::string& what, const Json& trace) {
    prepare();
    Json t{{"subcommand", sub}, {"error", what}, {"config", src->resolved()}, {"trace", trace}};
    const fs::path p = fs::path(out_dir) / "trace.json";
    write_file(p, experiment::dump(t));
    std::cerr << "numerical failure: " << what << "\ntrace written to " << p.string() << '\n';
  };

  try {
    const auto result = experiment::run(sub, *src, workers);
    prepare();
    for (const auto& f : result.files) write_file(fs::path(out_dir) / f.name, f.content);
    std::cout << result.summary << '\n';
    return 0;
  } catch (const experiment::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const experiment::NumericalFailure& e) {
    write_trace(e.what(), e.trace());
    return 3;
  } catch (const DomainError& e) {
    // an input combination the config checks did not catch
    std::cerr << src->name() << ":1: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << src->name() << ":1: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    write_trace(e.what(), Json::object());
    return 3;
  }
}
