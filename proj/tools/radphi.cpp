#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "radphi/cli.hpp"

int main(int argc, char** argv) {
  using namespace radphi;
  CLI::App app{"Radial solutions of quasilinear phi-Laplacian systems"};
  app.require_subcommand(1);

  cli::Options opt;
  std::string theta, punder;
  const std::map<std::string, ThetaMode> theta_map{{"o4", ThetaMode::O4}, {"o3", ThetaMode::O3Literal}};
  const std::map<std::string, PunderVariant> punder_map{{"notation", PunderVariant::Notation},
                                                        {"proof", PunderVariant::Proof}};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Problem configuration (JSON)")->required();
    sub->add_option("--out", opt.out_dir, "Output directory (default: config output.dir, else ./out)");
    sub->add_option("--jobs", opt.jobs, "Parallel jobs for sweep")->default_val(1)->check(CLI::PositiveNumber);
    sub->add_option("--theta-mode", theta, "Theta exponents: o4 uses (a0, a1), o3 uses (l, m)")
        ->check(CLI::IsMember({"o4", "o3"}));
    sub->add_option("--punder-variant", punder, "Lower functional of equation 2: notation | proof")
        ->check(CLI::IsMember({"notation", "proof"}));
    sub->add_flag("--verbose", opt.verbose, "Print per-sweep and per-verdict detail");
  };

  auto* validate = app.add_subcommand("validate", "Check (P1), (C1), (C2) and structural constraints");
  auto* solve = app.add_subcommand("solve", "Run the monotone iteration and write solution.csv");
  auto* classify = app.add_subcommand("classify", "Probe functional limits and apply the decision table");
  auto* sweep = app.add_subcommand("sweep", "Classify over a list of values of one configuration key");
  for (auto* sub : {validate, solve, classify, sweep}) add_common(sub);
  std::string key;
  std::vector<double> values;
  sweep->add_option("--key", key, "Dotted configuration key, e.g. params.gamma or grid.n");
  sweep->add_option("--values", values, "Values for the swept key")->delimiter(',');
  sweep->add_flag("--residual", opt.residual, "Append a grid-refinement residual column");

  app.footer(
      "Defaults: grid R=10 n=4000 grading=1; iteration tol=1e-10 max_iter=200; probe R0=R K=16 "
      "eps_c=1e-3 delta_d=1.5 eps_d=0.05 n=20000 grading=3; z_cap=1e8 z_points=4096; theta o4; punder notation.\n"
      "Exit codes: 0 ok, 1 input error, 2 condition failure, 3 iteration cap, 4 blow-up, 5 no rule matched.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }
  if (!theta.empty()) opt.theta = theta_map.at(theta);
  if (!punder.empty()) opt.punder = punder_map.at(punder);
  if (!key.empty()) opt.sweep_key = key;
  if (sweep->count("--values") > 0) opt.sweep_values = values;

  if (validate->parsed()) return cli::cmd_validate(opt, std::cout, std::cerr);
  if (solve->parsed()) return cli::cmd_solve(opt, std::cout, std::cerr);
  if (classify->parsed()) return cli::cmd_classify(opt, std::cout, std::cerr);
  return cli::cmd_sweep(opt, std::cout, std::cerr);
}
