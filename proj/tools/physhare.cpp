#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "physhare/core/canonical_json.hpp"
#include "physhare/relay/tcp.hpp"
#include "physhare/scenario/generators.hpp"
#include "physhare/scenario/harness.hpp"
#include "physhare/ui/bridge.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace physhare;

namespace {

std::pair<std::string, unsigned short> split_address(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("address", "expected host:port, got '" + s + "'");
  const int port = std::stoi(s.substr(colon + 1));
  if (port < 0 || port > 65535) throw CLI::ValidationError("address", "port out of range");
  return {s.substr(0, colon), static_cast<unsigned short>(port)};
}

std::string pretty(const json& j) { return json::parse(canonical_dump(j)).dump(2) + "\n"; }

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("values", "not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

scenario::Parameters apply_overrides(scenario::Parameters p, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("set", "expected name=value, got '" + s + "'");
    p = scenario::with_parameter(p, s.substr(0, eq), std::stod(s.substr(eq + 1)));
  }
  return p;
}

json log_json(const scenario::RunResult& r) {
  json j = json::object();
  auto list = [](const auto& items) {
    json a = json::array();
    for (const auto& x : items) a.push_back(sim::to_json(x));
    return a;
  };
  j["setdowns"] = list(r.log.setdowns);
  j["gestures"] = list(r.log.gestures);
  j["touches"] = list(r.log.touches);
  j["conflicts"] = list(r.log.conflicts);
  j["quiescent"] = list(r.log.quiescent);
  j["violations"] = list(r.log.violations);
  return j;
}

void print_summary(const scenario::RunMetrics& m) {
  std::cout << m.scenario << ": " << m.ticks << " ticks, " << m.setdowns << " set-downs, " << m.illusion_breaks
            << " illusion breaks";
  if (m.min_slack) std::cout << ", min slack " << *m.min_slack << " ms";
  if (m.gesture_accuracy) std::cout << ", gesture accuracy " << *m.gesture_accuracy;
  if (m.touches > 0) std::cout << ", touches " << (m.touches - m.touch_misses) << "/" << m.touches;
  if (m.conflicts > 0) std::cout << ", conflicts " << m.conflicts;
  std::cout << "\ndigest " << m.digest << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-site shared physical proxy simulator"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a scenario script from its generator");
  std::string gen_name;
  std::string gen_out;
  std::vector<std::string> gen_sets;
  gen->add_option("scenario", gen_name, "Scenario name")->required()->check(CLI::IsMember(scenario::kScenarioNames));
  gen->add_option("-o,--out", gen_out, "Output script path")->required();
  gen->add_option("--set", gen_sets, "Parameter override name=value");

  // run
  auto* run = app.add_subcommand("run", "Run a scenario script and write its metrics");
  std::string run_script;
  std::string run_out;
  std::optional<std::uint64_t> run_seed;
  run->add_option("script", run_script, "Scenario script")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", run_out, "Output directory")->required();
  run->add_option("--seed", run_seed, "Regenerate the script with this seed");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Run a script across values of one parameter");
  std::string sw_script;
  std::string sw_param;
  std::string sw_values;
  std::string sw_out;
  sw->add_option("script", sw_script, "Scenario script")->required()->check(CLI::ExistingFile);
  sw->add_option("-p,--parameter", sw_param, "Parameter to vary")->required()->check(CLI::IsMember(scenario::kSweepParameters));
  sw->add_option("-v,--values", sw_values, "Comma-separated values")->required();
  sw->add_option("-o,--out", sw_out, "CSV output (stdout when omitted)");

  // export
  auto* ex = app.add_subcommand("export", "Convert a metrics file");
  std::string ex_in;
  std::string ex_format = "csv";
  std::string ex_out;
  ex->add_option("metrics", ex_in, "metrics.json from a run")->required()->check(CLI::ExistingFile);
  ex->add_option("-f,--format", ex_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  ex->add_option("-o,--out", ex_out, "Output file (stdout when omitted)");

  // serve-relay
  auto* sr = app.add_subcommand("serve-relay", "Serve the relay over TCP");
  std::string sr_listen = "127.0.0.1:7700";
  bool sr_no_retention = false;
  std::string sr_latency;
  sr->add_option("-l,--listen", sr_listen, "host:port");
  sr->add_flag("--no-retention", sr_no_retention, "Do not replay retained messages to joining clients");
  sr->add_option("--latency-table", sr_latency, "JSON latency table per namespace")->check(CLI::ExistingFile);

  // stream-ui
  auto* su = app.add_subcommand("stream-ui", "Run a script live behind the browser bridge");
  std::string su_script;
  std::string su_listen = "127.0.0.1:8080";
  double su_speed = 1.0;
  bool su_exit = false;
  su->add_option("script", su_script, "Scenario script")->required()->check(CLI::ExistingFile);
  su->add_option("-l,--listen", su_listen, "host:port");
  su->add_option("--speed", su_speed, "Simulated ms per wall ms; 0 for unpaced")->check(CLI::NonNegativeNumber);
  su->add_flag("--exit-when-done", su_exit, "Stop serving once the script ends");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto params = apply_overrides(scenario::default_parameters(gen_name), gen_sets);
      scenario::save_script(scenario::build_script(gen_name, params), gen_out);
      std::cout << "wrote " << gen_out << "\n";
    } else if (*run) {
      auto script = scenario::load_script(run_script);
      if (run_seed) script = scenario::build_script(script.name, scenario::with_parameter(script.parameters, "seed",
                                                                                        static_cast<double>(*run_seed)));
      const auto result = scenario::run_scenario(script);
      const fs::path dir(run_out);
      write_file(dir / "metrics.json", pretty(scenario::to_json(result.metrics)));
      write_file(dir / "setdowns.csv", scenario::setdowns_csv(result.log));
      write_file(dir / "log.json", pretty(log_json(result)));
      print_summary(result.metrics);
    } else if (*sw) {
      const auto script = scenario::load_script(sw_script);
      const auto rows = scenario::sweep(script, sw_param, parse_values(sw_values));
      const auto csv = scenario::sweep_csv(sw_param, rows);
      if (sw_out.empty()) {
        std::cout << csv;
      } else {
        write_file(sw_out, csv);
      }
    } else if (*ex) {
      std::ifstream in(ex_in);
      const json metrics = json::parse(in);
      const std::string text = ex_format == "csv" ? scenario::metrics_csv(metrics) : pretty(metrics);
      if (ex_out.empty()) {
        std::cout << text;
      } else {
        write_file(ex_out, text);
      }
    } else if (*sr) {
      relay::RelayServer::Options opts;
      std::tie(opts.address, opts.port) = split_address(sr_listen);
      opts.relay.retention = !sr_no_retention;
      if (!sr_latency.empty()) opts.latency = relay::load_latency_table(sr_latency);
      relay::RelayServer server(opts);
      std::cout << "relay listening on " << opts.address << ":" << server.port() << std::endl;
      server.run();
    } else if (*su) {
      ui::UiBridge::Options opts;
      auto [host, port] = split_address(su_listen);
      opts.address = host;
      opts.port = port;
      opts.speed = su_speed;
      opts.linger = !su_exit;
      ui::UiBridge bridge(scenario::load_script(su_script), opts);
      std::cout << "ui bridge on http://" << host << ":" << bridge.bind() << std::endl;
      bridge.run();
    }
  } catch (const scenario::ScriptError& e) {
    std::cerr << "invalid script:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
