#include "cli.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gmmot/color_transfer.hpp"
#include "gmmot/error.hpp"
#include "gmmot/fit.hpp"
#include "gmmot/io.hpp"
#include "gmmot/multimarginal.hpp"
#include "gmmot/mw2.hpp"
#include "gmmot/mw2_kl.hpp"
#include "gmmot/simplex.hpp"
#include "gmmot/texture.hpp"

namespace gmmot::cli {
namespace {

constexpr double kCliWeightTol = 1e-6;

struct FitArgs {
  std::string input;
  std::string output;
  int k = 10;
  std::uint64_t seed = 0;
  int iters = 100;
};

struct DistanceArgs {
  std::string gmm0;
  std::string gmm1;
  std::string plan;
};

struct BarycenterArgs {
  std::vector<std::string> inputs;
  std::vector<double> weights;
  std::string output;
  std::string coupling;
};

struct BarygridArgs {
  std::vector<std::string> inputs;
  std::string output_dir;
  int grid = 5;
};

struct InterpolateArgs {
  std::string gmm0;
  std::string gmm1;
  std::string output;
  double t = 0.5;
};

struct DensityArgs {
  std::string gmm;
  std::string output;
  std::vector<double> grid;
};

struct ColorArgs {
  std::string source;
  std::string target;
  std::string output;
  int k = 10;
  std::string map = "mean";
  std::uint64_t seed = 0;
};

struct TextureArgs {
  std::string input;
  std::string output;
  int k = 10;
  int patch = 3;
  std::uint64_t seed = 0;
};

struct KlArgs {
  std::string nu0;
  std::string nu1;
  std::string output;
  std::string trace;
  int k = 3;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  double step = 1e-3;
  int iters = 5000;
};

void run_fit(const FitArgs& a, std::ostream& out) {
  EmOptions options;
  options.iterations = a.iters;
  const EmResult fit = fit_em_traced(load_csv(a.input), a.k, a.seed, options);
  save_gmm(fit.gmm, a.output);
  out << "components " << fit.gmm.size() << "\n"
      << "log_likelihood " << format_double(fit.log_likelihood.empty() ? 0.0 : fit.log_likelihood.back()) << "\n"
      << "seed " << a.seed << "\n";
}

void run_distance(const DistanceArgs& a, std::ostream& out) {
  const Mw2Result result = mw2(load_gmm(a.gmm0), load_gmm(a.gmm1));
  out << format_double(result.distance) << "\n";
  if (!a.plan.empty()) write_text_file(a.plan, plan_to_json(result.plan));
}

std::vector<Gmm> load_all(const std::vector<std::string>& paths) {
  std::vector<Gmm> out;
  for (const std::string& p : paths) out.push_back(load_gmm(p));
  return out;
}

void run_barycenter(const BarycenterArgs& a, std::ostream& out) {
  require(a.weights.size() == a.inputs.size(), ErrorKind::kInvalidInput,
          "barycenter: " + std::to_string(a.inputs.size()) + " inputs but " + std::to_string(a.weights.size()) +
              " weights");
  const Vector weights = checked_simplex(Eigen::Map<const Vector>(a.weights.data(), static_cast<Eigen::Index>(a.weights.size())),
                                         kCliWeightTol, "--weights");
  const BarycenterResult result = mw2_barycenter(load_all(a.inputs), weights);
  save_gmm(result.barycenter, a.output);
  if (!a.coupling.empty()) write_text_file(a.coupling, coupling_to_json(result.coupling));
  out << "components " << result.barycenter.size() << "\n"
      << "cost " << format_double(result.cost) << "\n";
}

void run_barygrid(const BarygridArgs& a, std::ostream& out) {
  require(a.grid >= 2, ErrorKind::kInvalidInput, "barygrid: --grid must be at least 2");
  const std::vector<Gmm> corners = load_all(a.inputs);
  std::filesystem::create_directories(a.output_dir);
  for (int i = 0; i < a.grid; ++i) {
    const double t = static_cast<double>(i) / (a.grid - 1);
    for (int j = 0; j < a.grid; ++j) {
      const double s = static_cast<double>(j) / (a.grid - 1);
      Vector weights(4);
      weights << (1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t;
      const BarycenterResult result = mw2_barycenter(corners, weights);
      const std::string name = "bary_" + std::to_string(i) + "_" + std::to_string(j) + ".json";
      save_gmm(result.barycenter, (std::filesystem::path(a.output_dir) / name).string());
      out << name << " " << format_double(s) << " " << format_double(t) << " " << result.barycenter.size() << "\n";
    }
  }
}

void run_interpolate(const InterpolateArgs& a, std::ostream& out) {
  const Mw2Result result = mw2(load_gmm(a.gmm0), load_gmm(a.gmm1));
  const Gmm mid = mw2_geodesic(result.plan, a.t);
  save_gmm(mid, a.output);
  out << "components " << mid.size() << "\n";
}

void run_density(const DensityArgs& a, std::ostream& out) {
  require(a.grid.size() == 5, ErrorKind::kInvalidInput, "eval-density: --grid takes xmin xmax ymin ymax n");
  const double n_real = a.grid[4];
  require(n_real >= 2 && n_real == static_cast<int>(n_real), ErrorKind::kInvalidInput,
          "eval-density: grid size n must be an integer >= 2");
  const int n = static_cast<int>(n_real);
  const Gmm gmm = load_gmm(a.gmm);
  require(gmm.dim() == 2, ErrorKind::kDimensionMismatch, "eval-density: mixture must be two-dimensional");
  const GmmDensity density(gmm);
  std::string csv = "x,y,density\n";
  for (int iy = 0; iy < n; ++iy) {
    const double y = a.grid[2] + (a.grid[3] - a.grid[2]) * iy / (n - 1);
    for (int ix = 0; ix < n; ++ix) {
      const double x = a.grid[0] + (a.grid[1] - a.grid[0]) * ix / (n - 1);
      csv += format_double(x) + "," + format_double(y) + "," +
             format_double(std::exp(density.log_pdf(Vector{{x, y}}))) + "\n";
    }
  }
  if (a.output.empty()) {
    out << csv;
  } else {
    write_text_file(a.output, csv);
  }
}

void run_color(const ColorArgs& a, std::ostream& out) {
  ColorTransferOptions options;
  options.k = a.k;
  options.map = a.map == "rand" ? MapKind::kRand : MapKind::kMean;
  options.seed = a.seed;
  save_png(color_transfer(load_png(a.source), load_png(a.target), options), a.output);
  out << "seed " << a.seed << "\n";
}

void run_texture(const TextureArgs& a, std::ostream& out) {
  TextureOptions options;
  options.k = a.k;
  options.patch_size = a.patch;
  options.seed = a.seed;
  save_png(texture_synthesize(load_png(a.input), options), a.output);
  out << "seed " << a.seed << "\n";
}

void run_kl(const KlArgs& a, std::ostream& out) {
  Mw2KlOptions options;
  options.seed = a.seed;
  options.step = a.step;
  options.iterations = a.iters;
  const Mw2KlResult result = mw2kl_optimize(load_csv(a.nu0), load_csv(a.nu1), a.k, a.lambda, options);
  write_text_file(a.output, mw2kl_params_to_json(result.params, a.lambda, result.sigma_min, a.seed));
  if (!a.trace.empty()) write_text_file(a.trace, energy_trace_csv(result.energy));
  out << "energy " << format_double(result.energy.back()) << "\n"
      << "iterations " << result.energy.size() - 1 << "\n"
      << "seed " << a.seed << "\n";
}

std::string first_line(std::string text) {
  const auto nl = text.find('\n');
  return nl == std::string::npos ? text : text.substr(0, nl);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian mixture optimal transport toolkit", "gmmot"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a Gaussian mixture to a CSV point cloud");
  fit_cmd->add_option("input", fit.input, "CSV file, one point per line")->required();
  fit_cmd->add_option("-o,--output", fit.output, "GMM JSON output")->required();
  fit_cmd->add_option("--k", fit.k, "Number of components")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--iters", fit.iters, "EM iterations")->capture_default_str();

  DistanceArgs dist;
  auto* dist_cmd = app.add_subcommand("distance", "MW2 distance between two mixtures");
  dist_cmd->add_option("gmm0", dist.gmm0)->required();
  dist_cmd->add_option("gmm1", dist.gmm1)->required();
  dist_cmd->add_option("--plan", dist.plan, "Write the optimal plan as JSON");

  BarycenterArgs bary;
  auto* bary_cmd = app.add_subcommand("barycenter", "MW2 barycenter of J mixtures");
  bary_cmd->add_option("inputs", bary.inputs, "GMM JSON files")->required()->expected(2, -1);
  bary_cmd->add_option("--weights", bary.weights, "J weights summing to one")->required()->expected(2, -1);
  bary_cmd->add_option("-o,--output", bary.output, "GMM JSON output")->required();
  bary_cmd->add_option("--coupling", bary.coupling, "Write the multi-marginal coupling as JSON");

  BarygridArgs grid;
  auto* grid_cmd = app.add_subcommand("barygrid", "Barycenters of four mixtures on a bilinear grid");
  grid_cmd->add_option("inputs", grid.inputs, "Four GMM JSON files (corners)")->required()->expected(4);
  grid_cmd->add_option("-o,--output-dir", grid.output_dir, "Directory for bary_<row>_<col>.json")->required();
  grid_cmd->add_option("--grid", grid.grid, "Grid points per side")->capture_default_str();

  InterpolateArgs interp;
  auto* interp_cmd = app.add_subcommand("interpolate", "Point on the MW2 geodesic");
  interp_cmd->add_option("gmm0", interp.gmm0)->required();
  interp_cmd->add_option("gmm1", interp.gmm1)->required();
  interp_cmd->add_option("--t", interp.t, "Time in [0, 1]")->capture_default_str();
  interp_cmd->add_option("-o,--output", interp.output, "GMM JSON output")->required();

  DensityArgs dens;
  auto* dens_cmd = app.add_subcommand("eval-density", "Evaluate a 2D mixture density on a grid");
  dens_cmd->add_option("gmm", dens.gmm)->required();
  dens_cmd->add_option("--grid", dens.grid, "xmin xmax ymin ymax n")->required()->expected(5);
  dens_cmd->add_option("-o,--output", dens.output, "CSV output (stdout when omitted)");

  ColorArgs color;
  auto* color_cmd = app.add_subcommand("color-transfer", "Transfer the colors of a target image");
  color_cmd->add_option("source", color.source, "PNG to recolor")->required();
  color_cmd->add_option("target", color.target, "PNG providing the palette")->required();
  color_cmd->add_option("-o,--output", color.output, "PNG output")->required();
  color_cmd->add_option("--k", color.k, "Components per color mixture")->capture_default_str();
  color_cmd->add_option("--map", color.map, "mean or rand")->check(CLI::IsMember({"mean", "rand"}))->capture_default_str();
  color_cmd->add_option("--seed", color.seed, "Seed for the rand map")->capture_default_str();

  TextureArgs tex;
  auto* tex_cmd = app.add_subcommand("texture", "Patch-based texture synthesis from an exemplar");
  tex_cmd->add_option("input", tex.input, "Exemplar PNG")->required();
  tex_cmd->add_option("-o,--output", tex.output, "PNG output")->required();
  tex_cmd->add_option("--k", tex.k, "Components per patch mixture")->capture_default_str();
  tex_cmd->add_option("--patch", tex.patch, "Patch size")->capture_default_str();
  tex_cmd->add_option("--seed", tex.seed, "Random seed")->capture_default_str();

  KlArgs kl;
  auto* kl_cmd = app.add_subcommand("mw2kl", "Relaxed MW2 + KL fit between two 1D point clouds");
  kl_cmd->add_option("nu0", kl.nu0, "CSV with one value per line")->required();
  kl_cmd->add_option("nu1", kl.nu1, "CSV with one value per line")->required();
  kl_cmd->add_option("-o,--output", kl.output, "Parameter JSON output")->required();
  kl_cmd->add_option("--trace", kl.trace, "Energy trace CSV output");
  kl_cmd->add_option("--k", kl.k, "Components")->capture_default_str();
  kl_cmd->add_option("--lambda", kl.lambda, "Weight of the likelihood terms")->capture_default_str();
  kl_cmd->add_option("--seed", kl.seed, "Random seed")->capture_default_str();
  kl_cmd->add_option("--step", kl.step, "Initial gradient step")->capture_default_str();
  kl_cmd->add_option("--iters", kl.iters, "Iterations")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << first_line(e.what()) << "\n";
    return 1;
  }

  try {
    if (fit_cmd->parsed()) run_fit(fit, out);
    if (dist_cmd->parsed()) run_distance(dist, out);
    if (bary_cmd->parsed()) run_barycenter(bary, out);
    if (grid_cmd->parsed()) run_barygrid(grid, out);
    if (interp_cmd->parsed()) run_interpolate(interp, out);
    if (dens_cmd->parsed()) run_density(dens, out);
    if (color_cmd->parsed()) run_color(color, out);
    if (tex_cmd->parsed()) run_texture(tex, out);
    if (kl_cmd->parsed()) run_kl(kl, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << first_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << first_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gmmot::cli
