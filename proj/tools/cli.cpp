// Command-line front end. Subcommands cover the individual stages plus the
// full pipeline; every one accepts --config with the JSON schema of RunConfig
// and a few common overrides. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure, 4 violated theorem precondition.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "fracsource/pipeline.hpp"

using namespace fracsource;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<double> s, epsilon, tau, noise;
  std::optional<int> N, M, f_M, e_n, n_star, mode;
  std::optional<std::string> sigma, f, theorem, output_dir, cache_dir,
      tau_endpoint;
  bool strict = false;
  bool epsilon_auto = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--s", s, "fractional order in (0,1)");
    cmd->add_option("--N", N, "interior mesh nodes");
    cmd->add_option("--M", M, "fine time steps");
    cmd->add_option("--f-M", f_M, "coarse control horizons");
    cmd->add_option("--e-n", e_n, "recovered coefficient count");
    cmd->add_option("--n-star", n_star, "spectral truncation");
    cmd->add_option("--epsilon", epsilon, "penalization parameter");
    cmd->add_flag("--epsilon-auto", epsilon_auto,
                  "select epsilon automatically");
    cmd->add_option("--tau", tau, "control horizon (snapped to the grid)");
    cmd->add_option("--mode", mode, "terminal eigenmode index");
    cmd->add_option("--sigma", sigma, "temporal profile: exp|one|cos10|quad");
    cmd->add_option("--f", f, "source: f1..f4 | nodal:<file> | coeffs:<file>");
    cmd->add_option("--theorem", theorem, "reconstruction formula: 1|2|both");
    cmd->add_option("--noise", noise, "observation noise level");
    cmd->add_option("--output-dir", output_dir, "output directory");
    cmd->add_option("--cache-dir", cache_dir, "cache directory");
    cmd->add_option("--tau-endpoint", tau_endpoint,
                    "outer quadrature endpoint handling: implicit|zero");
    cmd->add_flag("--strict", strict, "hard-stop on s <= 1/2");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig()
                                      : RunConfig::from_file(config_path);
    if (s) c.s = *s;
    if (N) c.N = *N;
    if (M) c.M = *M;
    if (f_M) c.f_M = *f_M;
    if (e_n) c.e_n = *e_n;
    if (n_star) c.n_star = *n_star;
    if (epsilon) c.epsilon = *epsilon;
    if (epsilon_auto) c.epsilon_auto = true;
    if (sigma) c.sigma_name = *sigma;
    if (f) c.f_name = *f;
    if (theorem) c.theorem = *theorem;
    if (noise) c.noise = *noise;
    if (output_dir) c.output_dir = *output_dir;
    if (cache_dir) c.cache_dir = *cache_dir;
    if (tau_endpoint) c.tau_endpoint = *tau_endpoint;
    if (strict) c.strict = true;
    c.validate();
    return c;
  }
};

struct Workspace {
  Mesh1D mesh;
  BandedMatrix mass;
  SymmetricToeplitzMatrix stiff;
  SpectralBasis basis;
  SubdomainMask mask;
  TimeGrid grid;

  explicit Workspace(const RunConfig& c)
      : mesh(c.N),
        mass(assemble_mass(mesh)),
        stiff(assemble_stiffness(mesh, FractionalOrder(c.s))),
        basis(solve_eigenbasis(mesh, mass, stiff, c.s, c.truncation())),
        mask(c.omega_lo, c.omega_hi, mesh),
        grid(c.T, c.M, c.f_M) {}
};

int snap_horizon(const RunConfig& c, const TimeGrid& grid, double tau) {
  if (tau <= 0.0) return grid.coarse_steps();
  int best = 1;
  for (int l = 2; l <= grid.coarse_steps(); ++l)
    if (std::abs(grid.coarse_time(l) - tau) <
        std::abs(grid.coarse_time(best) - tau))
      best = l;
  (void)c;
  return best;
}

void cmd_assemble(const CommonArgs& args) {
  const RunConfig c = args.resolve();
  const Mesh1D mesh(c.N);
  const FractionalOrder order(c.s);
  const SymmetricToeplitzMatrix stiff = assemble_stiffness(mesh, order);
  std::printf("N = %d, h = %.6e, s = %.3f, C_s = %.12f\n", c.N,
              mesh.spacing(), c.s, order.c_s);
  std::printf("stiffness generator a(k; h), k = 0..%d:\n",
              std::min(c.N - 1, 9));
  for (int k = 0; k < std::min(c.N, 10); ++k)
    std::printf("  a(%d) = % .12e\n", k, stiff.first_row()[k]);
}

void cmd_eigs(const CommonArgs& args) {
  const RunConfig c = args.resolve();
  const Workspace ws(c);
  std::printf("n, lambda_n, asymptote, relative gap\n");
  for (int n = 1; n <= c.truncation(); ++n) {
    const double ref = asymptotic_eigenvalue(n, c.s);
    std::printf("%d, %.12e, %.12e, %.3e\n", n, ws.basis.lambda(n), ref,
                std::abs(ws.basis.lambda(n) - ref) / ref);
  }
}

void cmd_forward(const CommonArgs& args) {
  const RunConfig c = args.resolve();
  const Workspace ws(c);
  const SigmaProfile sigma = catalogue_sigma(c.sigma_name, c.T);
  const Vector f = catalogue_f(c.f_name, ws.mesh);
  const Vector coeffs = project(f, ws.basis, c.truncation());
  const Trajectory traj = spectral_forward(coeffs, sigma, ws.basis, ws.grid);
  std::filesystem::create_directories(c.output_dir);
  const std::string path = c.output_dir + "/forward.csv";
  std::ofstream out(path);
  out.precision(12);
  out << "t,norm,center_value\n";
  const int mid = ws.mesh.interior() / 2;
  for (int j = 0; j <= ws.grid.fine_steps(); ++j)
    out << ws.grid.fine_time(j) << ","
        << mass_norm(traj.values.col(j), ws.mass) << ","
        << traj.values(mid, j) << "\n";
  std::printf("wrote %s\n", path.c_str());
}

void cmd_control(const CommonArgs& args) {
  const RunConfig c = args.resolve();
  const Workspace ws(c);
  const int mode = args.mode.value_or(1);
  const int ell = snap_horizon(c, ws.grid, args.tau.value_or(-1.0));
  const ControlFamily fam =
      build_control_family(ws.basis, ws.mask, ws.grid, c.epsilon, mode);
  const Matrix values = control_values(fam, ell, ws.basis, ws.mask, ws.grid);
  std::filesystem::create_directories(c.output_dir);
  const std::string path = c.output_dir + "/control.csv";
  std::ofstream out(path);
  out.precision(12);
  out << "x";
  for (int j = 0; j < values.cols(); ++j)
    out << ",t" << ws.grid.fine_time(j);
  out << "\n";
  for (int i = 0; i < values.rows(); ++i) {
    out << ws.mesh.node(i + 1);
    for (int j = 0; j < values.cols(); ++j) out << "," << values(i, j);
    out << "\n";
  }
  std::printf("mode %d, tau = %.6f, epsilon = %.3e -> %s\n", mode,
              ws.grid.coarse_time(ell), c.epsilon, path.c_str());
}

void cmd_verify(const CommonArgs& args) {
  const RunConfig c = args.resolve();
  const Workspace ws(c);
  const int mode = args.mode.value_or(1);
  const int ell = snap_horizon(c, ws.grid, args.tau.value_or(-1.0));
  const ControlFamily fam =
      build_control_family(ws.basis, ws.mask, ws.grid, c.epsilon, mode);
  const double norm = verify_null_control(fam, ell, ws.basis, ws.mask,
                                          ws.mesh, ws.mass, ws.stiff, ws.grid);
  std::printf(
      "controlled state at t = 0: ||phi(.,0)||_M = %.6e "
      "(mode %d, tau = %.6f, epsilon = %.3e)\n",
      norm, mode, ws.grid.coarse_time(ell), c.epsilon);
}

void cmd_volterra(const CommonArgs& args) {
  const RunConfig c = args.resolve();
  const Workspace ws(c);
  const SigmaProfile sigma = catalogue_sigma(c.sigma_name, c.T);
  const int mode = args.mode.value_or(1);
  const int ell = snap_horizon(c, ws.grid, args.tau.value_or(-1.0));
  const int last = ws.grid.fine_index(ell);
  const VolterraSystem sys =
      build_block_system(sigma, last + 1, ws.grid.fine_step());
  Vector control(last + 1);
  const double lambda = ws.basis.lambda(mode);
  for (int j = 0; j <= last; ++j)
    control[j] = std::exp(-lambda * ws.grid.fine_time(j));
  const auto [theta, theta_t] = solve_volterra(control, sys);
  std::filesystem::create_directories(c.output_dir);
  const std::string path = c.output_dir + "/volterra.csv";
  std::ofstream out(path);
  out.precision(12);
  out << "t,theta,theta_t,residual_input\n";
  for (int j = 0; j <= last; ++j)
    out << ws.grid.fine_time(j) << "," << theta[j] << "," << theta_t[j] << ","
        << control[j] << "\n";
  std::printf("modal factor for mode %d on [0, %.6f], residual = %.3e -> %s\n",
              mode, ws.grid.coarse_time(ell),
              volterra_residual(control, theta, theta_t, sys), path.c_str());
}

void cmd_epsilon(const CommonArgs& args) {
  const RunConfig c = args.resolve();
  const Workspace ws(c);
  const EpsilonSelection sel =
      select_epsilon(ws.basis, ws.mask, ws.grid, c.e_n);
  if (!sel.success)
    throw std::runtime_error("epsilon selection failed: achieved " +
                             std::to_string(sel.achieved) + " vs threshold " +
                             std::to_string(sel.threshold));
  std::printf("selected epsilon = %.6e (achieved %.6e < threshold %.6e)\n",
              sel.epsilon, sel.achieved, sel.threshold);
}

void print_coeff_table(const Manifest& man) {
  const auto& coeffs = man.data.at("coefficients");
  const bool has1 = coeffs.contains("thm1");
  const bool has2 = coeffs.contains("thm2");
  const int count = static_cast<int>(
      (has1 ? coeffs.at("thm1") : coeffs.at("thm2")).size());
  std::printf("n %s%s\n", has1 ? " f_n(thm1)" : "", has2 ? " f_n(thm2)" : "");
  for (int n = 0; n < count; ++n) {
    std::printf("%2d", n + 1);
    if (has1) std::printf(" % .6e", coeffs.at("thm1")[n].get<double>());
    if (has2) std::printf(" % .6e", coeffs.at("thm2")[n].get<double>());
    std::printf("\n");
  }
}

void cmd_reconstruct(const CommonArgs& args) {
  const Manifest man = run_pipeline(args.resolve());
  print_coeff_table(man);
}

void cmd_pipeline(const CommonArgs& args) {
  const RunConfig c = args.resolve();
  const Manifest man = run_pipeline(c);
  print_coeff_table(man);
  for (const auto& w : man.data.at("warnings"))
    std::printf("warning: %s\n", w.get<std::string>().c_str());
  std::printf("manifest: %s/manifest.json\n", c.output_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"control-based source reconstruction for the 1D fractional "
               "heat equation"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    void (*run)(const CommonArgs&);
  };
  const Entry entries[] = {
      {"assemble", "assemble and summarize the FEM matrices", cmd_assemble},
      {"eigs", "print the spectral basis against the asymptote", cmd_eigs},
      {"forward", "solve the forward problem for a catalogue source",
       cmd_forward},
      {"control", "build one penalized null control and dump it", cmd_control},
      {"verify", "re-simulate a control and report the terminal norm",
       cmd_verify},
      {"volterra", "solve the modal kernel system at one horizon",
       cmd_volterra},
      {"reconstruct", "run the pipeline and print the coefficients",
       cmd_reconstruct},
      {"pipeline", "full run with CSV outputs and manifest", cmd_pipeline},
      {"epsilon", "automatic penalization parameter selection", cmd_epsilon},
  };

  std::vector<std::pair<CommonArgs, void (*)(const CommonArgs&)>> bound;
  bound.reserve(std::size(entries));
  std::vector<CLI::App*> cmds;
  for (const Entry& e : entries) {
    CLI::App* cmd = app.add_subcommand(e.name, e.help);
    bound.emplace_back(CommonArgs{}, e.run);
    bound.back().first.attach(cmd);
    cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (std::size_t i = 0; i < bound.size(); ++i)
      if (cmds[i]->parsed()) bound[i].second(bound[i].first);
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "precondition violated: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}
