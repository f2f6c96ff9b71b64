// Writes the desk network and a synthetic scenario file.
#include "hostcap/error.hpp"
#include "hostcap/synth.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Generate desk-scale network and scenario files", "hostcap-synth"};
  hostcap::DeskNetworkSpec net_spec;
  hostcap::ScenarioSpec scen_spec;
  std::uint64_t seed = 42;
  std::string network_out, scenarios_out;
  app.add_option("--buses", net_spec.buses)->capture_default_str();
  app.add_option("--r", net_spec.r)->capture_default_str();
  app.add_option("--x", net_spec.x)->capture_default_str();
  app.add_option("--s-max", net_spec.s_max)->capture_default_str();
  app.add_option("--psi-max", net_spec.psi_max)->capture_default_str();
  app.add_option("--count", scen_spec.count, "Number of ten-minute scenarios")->capture_default_str();
  app.add_option("--load-base", scen_spec.load_base)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--network-out", network_out, "Network JSON to write");
  app.add_option("--scenarios-out", scenarios_out, "Scenario CSV to write");
  CLI11_PARSE(app, argc, argv);

  try {
    const hostcap::RadialNetwork net = hostcap::desk_network(net_spec);
    if (!network_out.empty()) hostcap::save_network(net, network_out);
    if (!scenarios_out.empty()) {
      hostcap::save_scenarios(hostcap::synth_scenarios(net_spec.buses, scen_spec, seed), scenarios_out, true);
    }
  } catch (const hostcap::Error& e) {
    std::cerr << "hostcap-synth: " << e.what() << '\n';
    return 5;
  }
  return 0;
}
