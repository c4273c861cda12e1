// eecdma: experiment runner and scalar helpers.
//
//   eecdma run <config>
//   eecdma target-sinr --packet-len M
//   eecdma lsa-predict <config>
//   eecdma social-sinr --alpha A --packet-len M

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eecdma/error.hpp"
#include "eecdma/experiment.hpp"
#include "eecdma/game.hpp"
#include "eecdma/lsa.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient CDMA uplink experiments"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", run_config, "key = value config file")->required()->check(CLI::ExistingFile);

  int target_M = 120;
  auto* target = app.add_subcommand("target-sinr", "Print the utility-maximizing SINR for packet length M");
  target->add_option("--packet-len,-M", target_M, "packet length M (>= 2)")->required();

  std::string lsa_config;
  auto* lsa = app.add_subcommand("lsa-predict", "Print large-system profiles for each K in the config");
  lsa->add_option("config", lsa_config, "key = value config file")->required()->check(CLI::ExistingFile);

  double social_alpha = 1.0;
  int social_M = 120;
  auto* social = app.add_subcommand("social-sinr", "Print the social-optimum common SINR");
  social->add_option("--alpha,-a", social_alpha, "load K/N")->required();
  social->add_option("--packet-len,-M", social_M, "packet length M (>= 2)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const eecdma::ExperimentReport rep = eecdma::run_experiment(eecdma::load_spec(run_config));
      for (const std::string& f : rep.files) std::cout << f << '\n';
      for (const std::string& e : rep.errors) std::cerr << "row error: " << e << '\n';
    } else if (*target) {
      std::cout << eecdma::format_double(eecdma::target_sinr(target_M)) << '\n';
    } else if (*lsa) {
      eecdma::write_profile_csv(std::cout, eecdma::lsa_predict(eecdma::load_spec(lsa_config)));
    } else if (*social) {
      eecdma::LsaInputs in;
      in.alpha = social_alpha;
      std::cout << eecdma::format_double(eecdma::social_optimum_sinr(in, social_M)) << '\n';
    }
  } catch (const eecdma::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
