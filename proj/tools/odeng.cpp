#include "odeng/error.hpp"
#include "odeng/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace odeng;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("'" + item + "' is not a number", key);
    }
  }
  return out;
}

void write_error(const fs::path& out_dir, const std::string& type, const std::string& message,
                 const std::string& key, int code) {
  Json doc{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
  if (!key.empty()) doc["error"]["key"] = key;
  try {
    write_atomic(out_dir / "error.json", doc.dump(2) + "\n");
  } catch (const std::exception&) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal sampling designs for random-effect models with correlated errors"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<int> quad_nodes;
  std::optional<std::uint64_t> seed;
  std::string design_path;
  std::string ref_path;
  std::string box;
  std::string axes_text = "1,2";
  int grid = 5;
  std::size_t k = 200000;

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "problem config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--quad-nodes", quad_nodes, "Simpson nodes (odd, >= 3)");
    sub->add_option("--seed", seed, "random seed");
  };

  CLI::App* solve = app.add_subcommand("solve", "optimal density, quantile design and refinement");
  common(solve);

  CLI::App* eff = app.add_subcommand("eff", "efficiencies of a design");
  common(eff);
  eff->add_option("--design", design_path, "design (JSON array)")->required();
  eff->add_option("--ref", ref_path, "reference design (default: refined exact optimum)");

  CLI::App* sens = app.add_subcommand("sens", "efficiency under misspecified beta");
  common(sens);
  sens->add_option("--design", design_path, "design (JSON array)")->required();
  sens->add_option("--box", box, "lo1,hi1,lo2,hi2 (one pair per axis)")->required();
  sens->add_option("--grid", grid, "grid points per axis (>= 2)");
  sens->add_option("--axes", axes_text, "1-based parameter indices swept (default 1,2)");

  CLI::App* validate = app.add_subcommand("validate", "Monte-Carlo check of the OLS covariance");
  common(validate);
  validate->add_option("--design", design_path, "design (JSON array)")->required();
  validate->add_option("--k", k, "number of simulated subjects");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const fs::path out(out_dir);
  try {
    const RunOverrides overrides{quad_nodes, seed};
    const ProblemConfig config = apply_overrides(load_config(config_path), overrides);

    if (solve->parsed()) {
      const SolveResult r = run_solve(config);
      write_atomic(out / "solve.json", solve_json(r).dump(2) + "\n");
      write_atomic(out / "density.csv", density_csv(r.density.density));
      std::cout << "quantile design:";
      for (double t : r.quantile_design.points()) std::cout << ' ' << t;
      std::cout << '\n';
      if (r.refined) {
        std::cout << "refined design:";
        for (double t : r.refined->design.points()) std::cout << ' ' << t;
        std::cout << "\nefficiency quantile " << *r.quantile_efficiency << ", uniform "
                  << *r.uniform_efficiency << '\n';
      }
    } else if (eff->parsed()) {
      const std::vector<double> a = load_design_points(design_path);
      std::optional<std::vector<double>> b;
      if (!ref_path.empty()) b = load_design_points(ref_path);
      const EfficiencyReport r = run_efficiency(config, a, b);
      write_atomic(out / "efficiency.json", efficiency_json(config, r).dump(2) + "\n");
      for (const auto& e : r.entries) {
        std::cout << estimator_name(e.estimator) << " efficiency " << e.efficiency << '\n';
      }
    } else if (sens->parsed()) {
      const std::vector<double> a = load_design_points(design_path);
      const std::vector<double> idx = parse_list(axes_text, "sens.axes");
      const std::vector<double> bounds = parse_list(box, "sens.box");
      if (bounds.size() != 2 * idx.size()) {
        throw ValidationError("needs one lo,hi pair per axis", "sens.box");
      }
      std::vector<SensitivityAxis> axes;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 1 || idx[i] != std::floor(idx[i])) {
          throw ValidationError("indices are 1-based integers", "sens.axes");
        }
        axes.push_back({static_cast<std::size_t>(idx[i]) - 1, bounds[2 * i], bounds[2 * i + 1]});
      }
      const auto nodes = run_sensitivity(config, a, axes, grid);
      write_atomic(out / "sensitivity.csv", sensitivity_csv(nodes, axes));
      write_atomic(out / "sensitivity.json",
                   sensitivity_json(config, a, axes, grid, nodes).dump(2) + "\n");
      std::cout << nodes.size() << " nodes written\n";
    } else if (validate->parsed()) {
      const std::vector<double> a = load_design_points(design_path);
      const ValidationReport r = run_validation(config, a, k, config.seed);
      write_atomic(out / "validate.json", validation_json(config, a, r).dump(2) + "\n");
      std::cout << "relative Frobenius error " << r.relative_error << (r.pass ? " PASS" : " FAIL")
                << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    write_error(out, "validation", e.what(), e.key(), kExitValidation);
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    write_error(out, "numerical", e.what(), "", kExitNumerical);
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    write_error(out, "internal", e.what(), "", kExitNumerical);
    return kExitNumerical;
  }
  return kExitOk;
}
