#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stein/error.hpp"
#include "stein/harness/config.hpp"
#include "stein/harness/emit.hpp"
#include "stein/harness/experiment.hpp"
#include "stein/harness/rate.hpp"
#include "stein/harness/suites.hpp"

namespace {

using namespace stein;
using namespace stein::harness;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> format;
};

int run_command(const std::string& path, const Globals& g) {
  auto config = load_config(path);
  if (g.seed) config.seed = *g.seed;
  if (g.threads) config.threads = *g.threads;
  if (g.format) config.output.format = *g.format;
  validate(config);
  const auto text = emit(run_experiment(config), config.output.format);
  if (config.output.path.empty())
    std::cout << text;
  else
    write_file(config.output.path, text);
  return 0;
}

// One fit per model name, in order of first appearance.
int rate_command(const std::string& path, const Globals& g) {
  const auto records = parse_records(read_file(path));
  std::vector<std::string> order;
  std::map<std::string, std::vector<ExperimentRecord>> groups;
  for (const auto& r : records) {
    if (!groups.count(r.model)) order.push_back(r.model);
    groups[r.model].push_back(r);
  }
  const std::string format = g.format.value_or("csv");
  nlohmann::json doc = {{"schema_version", kRecordSchema}, {"fits", nlohmann::json::array()}};
  if (format == "csv") std::cout << "model,points,slope,intercept,r2\n";
  for (const auto& m : order) {
    const auto fit = fit_rate(groups[m]);
    if (format == "csv") {
      std::printf("%s,%zu,%.17g,%.17g,%.17g\n", m.c_str(), fit.points, fit.slope, fit.intercept, fit.r2);
    } else {
      doc["fits"].push_back(
          {{"model", m}, {"points", fit.points}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}});
    }
  }
  if (format == "json") std::cout << doc.dump(2) << "\n";
  return 0;
}

void print_result(const std::string& id, const std::string& title, const SuiteResult& r) {
  std::cout << (r.pass ? "PASS " : "FAIL ") << id << "  " << title << "\n";
  for (const auto& d : r.details) std::cout << "    " << d << "\n";
  std::cout.flush();
}

int check_command(const std::string& name, const Globals& g) {
  const std::uint64_t seed = g.seed.value_or(1);
  const unsigned threads = g.threads.value_or(1);
  if (name == "list") {
    for (const auto& s : all_suites()) std::cout << s.id << "  " << s.title << "\n";
    std::cout << "c12  determinism across thread counts\nall  every suite above\n";
    return 0;
  }
  bool ok = true;
  auto one = [&](const Suite& s) {
    const auto r = s.run(seed, threads);
    print_result(s.id, s.title, r);
    ok = ok && r.pass;
  };
  if (name == "all") {
    for (const auto& s : all_suites()) one(s);
    const auto d = determinism_check(seed);
    print_result("c12", "determinism across thread counts", d);
    ok = ok && d.pass;
  } else if (name == "c12") {
    const auto d = determinism_check(seed);
    print_result("c12", "determinism across thread counts", d);
    ok = d.pass;
  } else if (const auto* s = find_suite(name)) {
    one(*s);
  } else {
    throw ConfigError("unknown suite '" + name + "' (try 'check list')");
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized-derivative normal approximation bench"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { g.seed = v; }, "Root seed");
  app.add_option_function<unsigned>("--threads", [&](const unsigned& v) { g.threads = v; }, "Worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option_function<std::string>("--format", [&](const std::string& v) { g.format = v; }, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string config_path, records_path, suite;
  auto* run = app.add_subcommand("run", "Run the sweep described by a config file");
  run->add_option("config-file", config_path)->required()->check(CLI::ExistingFile);
  auto* rate = app.add_subcommand("rate", "Fit log delta_hat against log n per model");
  rate->add_option("records-file", records_path)->required()->check(CLI::ExistingFile);
  auto* check = app.add_subcommand("check", "Run an invariant suite (list, all, c1..c12)");
  check->add_option("suite-name", suite)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return run_command(config_path, g);
    if (rate->parsed()) return rate_command(records_path, g);
    return check_command(suite, g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
