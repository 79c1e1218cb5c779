#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "malnorm/malnorm.hpp"

using namespace malnorm;

namespace {

// Bad option values; reported like parse errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string flavor;
  double tolerance = 1e-8;
  std::size_t threads = 0;
  std::string output;
};

template <typename F>
auto usage_checked(F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
}

std::optional<BasisFlavor> flavor_of(const Globals& g) {
  if (g.flavor.empty()) return std::nullopt;
  return usage_checked([&] { return parse_basis_flavor(g.flavor); });
}

// Main output goes to --output when given, stdout otherwise.
void emit(const Globals& g, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(g.output, std::ios::binary);
  if (!f) throw Error("cannot open '" + g.output + "' for writing");
  f << text;
  if (!f) throw Error("write failed on '" + g.output + "'");
}

void emit_json(const Globals& g, const Json& j) { emit(g, to_json_text(j) + "\n"); }

int run_mal(const Globals& g, const std::string& file, const std::string& solver_name) {
  const MalSolver solver = usage_checked([&] { return parse_mal_solver(solver_name); });
  const auto fl = flavor_of(g);
  const AnyMatrix x = read_matrix_file(file);
  const Json j = std::visit(
      [&](const auto& m) {
        const MalResult r = compute_mal(m, solver, fl, g.tolerance, g.seed);
        return to_json(r, m.rows());
      },
      x);
  emit_json(g, j);
  return 0;
}

int run_sample(const Globals& g, const std::string& kind_name, std::size_t n, std::uint64_t index) {
  const EnsembleKind kind = usage_checked([&] { return parse_ensemble_kind(kind_name); });
  if (n < 2) throw UsageError("--n must be at least 2");
  const AnyMatrix x = sample_ensemble(EnsembleSpec{kind, n, g.seed}, index);
  emit(g, std::visit([](const auto& m) { return matrix_to_string(m); }, x));
  return 0;
}

int run_expander(const Globals& g, const std::vector<std::string>& files) {
  const BasisFlavor fl = flavor_of(g).value_or(BasisFlavor::complex_hermitian);
  std::vector<AnyMatrix> ms;
  bool all_real = true;
  for (const auto& f : files) {
    ms.push_back(read_matrix_file(f));
    all_real = all_real && std::holds_alternative<RealMatrix>(ms.back());
  }
  const ExpanderOptions opts{g.tolerance, 0};
  ExpanderReport r;
  if (all_real) {
    std::vector<RealMatrix> us;
    for (auto& m : ms) us.push_back(std::get<RealMatrix>(m));
    r = expander_report<double>(us, fl, opts);
  } else {
    std::vector<ComplexMatrix> us;
    for (auto& m : ms)
      us.push_back(std::visit([](const auto& a) { return ComplexMatrix(to_complex(a)); }, m));
    r = expander_report<cplx>(us, fl, opts);
  }
  emit_json(g, to_json(r));
  return 0;
}

int run_construct(const Globals& g, std::size_t n, const std::string& solver_name,
                  double resolution) {
  if (n < 2) throw UsageError("--n must be at least 2");
  const MalSolver solver = usage_checked([&] { return parse_mal_solver(solver_name); });
  SeededStream s(g.seed, sample_stream_index(n, 0));
  const ComplexMatrix u = haar_unitary(n, s);
  const ComplexMatrix v = haar_unitary(n, s);
  const auto cert = certify(u, v, flavor_of(g), CertifyOptions{g.tolerance, resolution, solver});
  Json j = to_json(cert);
  j["seed"] = g.seed;
  emit_json(g, j);
  return 0;
}

int run_campaign_cmd(const Globals& g, const std::string& config_path, bool seed_given,
                     bool threads_given, bool output_given) {
  CampaignConfig c = usage_checked([&] { return read_campaign_config(config_path); });
  if (seed_given) c.seed = g.seed;
  if (threads_given) c.threads = g.threads;
  if (output_given) c.output = g.output;
  if (!g.flavor.empty()) c.flavor = flavor_of(g);
  if (c.output.empty()) throw UsageError("campaign: no output path (config 'output' or --output)");
  const auto o = run_campaign(c);
  Json stats = Json::array();
  for (const auto& s : summarize_by_n(load_records(c.output), std::string(to_string(c.ensemble))))
    stats.push_back(to_json(s));
  const Json j{{"computed", o.computed}, {"failed", o.failed},   {"output", c.output},
               {"requested", o.requested}, {"skipped", o.skipped}, {"stats", stats}};
  std::cout << to_json_text(j) << "\n";
  return 0;
}

int run_fit(const Globals& g, const std::string& in, const std::string& target_name,
            std::size_t min_n, const std::string& ensemble) {
  const FitTarget target = usage_checked([&] { return parse_fit_target(target_name); });
  const auto recs = load_records(in);
  std::optional<std::string> ens;
  if (!ensemble.empty()) ens = ensemble;
  const PowerFit f = fit_records(recs, target, min_n, ens);
  Json points = Json::array();
  for (const auto& s : summarize_by_n(recs, ens))
    if (s.n >= min_n) points.push_back(to_json(s));
  emit_json(g, Json{{"fit", to_json(f)},
                    {"min_n", min_n},
                    {"points", points},
                    {"target", target_name}});
  return 0;
}

int run_cloud(const Globals& g, const std::string& kind_name, std::size_t n, std::size_t samples,
              const std::string& svg) {
  const EnsembleKind kind = usage_checked([&] { return parse_ensemble_kind(kind_name); });
  if (n < 2) throw UsageError("--n must be at least 2");
  if (samples < 1) throw UsageError("--samples must be at least 1");
  const auto cloud = eig_cloud(kind, n, samples, g.seed);
  if (cloud.failed_samples) {
    std::cerr << "cloud: skipped " << cloud.failed_samples << " sample(s) whose eigensolver failed\n";
  }
  std::ostringstream csv;
  write_cloud_csv(csv, cloud.points);
  emit(g, csv.str());
  if (!svg.empty()) render_scatter(cloud.points, svg);
  return 0;
}

int run_selftest(const Globals& g, std::size_t instances) {
  Json checks = Json::array();
  bool ok = true;
  for (const auto& suite : {identity_suite(g.seed, instances), oracle_suite()})
    for (const auto& c : suite) {
      checks.push_back(to_json(c));
      ok = ok && c.pass;
    }
  emit_json(g, Json{{"checks", checks}, {"pass", ok}});
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Malnormality constants, quantum expanders and random-matrix experiments."};
  app.name("malnorm");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  g.threads = std::max(1u, std::thread::hardware_concurrency());
  auto* seed_opt = app.add_option("--seed", g.seed, "Base seed for all randomness")->capture_default_str();
  app.add_option("--flavor", g.flavor, "real-symmetric or complex-hermitian");
  app.add_option("--tolerance", g.tolerance, "Solver tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* threads_opt =
      app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* output_opt = app.add_option("--output", g.output, "Write the result here instead of stdout");
  // A repeated global option takes its last value.
  for (auto* o : {seed_opt, threads_opt, output_opt}) o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.get_option("--flavor")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.get_option("--tolerance")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* mal = app.add_subcommand("mal", "mal(X) of the matrix in a file, as JSON");
  std::string mal_file, solver = "dense";
  mal->add_option("matrix-file", mal_file)->required();
  mal->add_option("--solver", solver, "dense, lanczos or local-opt")->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Draw one ensemble sample");
  std::string kind;
  std::size_t n = 0, index = 0;
  sample->add_option("--kind", kind, "Ensemble kind")->required();
  sample->add_option("--n", n, "Dimension")->required();
  sample->add_option("--index", index, "Sample index")->capture_default_str();

  auto* expander = app.add_subcommand("expander", "Expander constants of a unitary tuple");
  std::vector<std::string> files;
  expander->add_option("files", files, "One matrix file per unitary")->required();

  auto* construct = app.add_subcommand("construct", "Certify the 3n x 3n construction for a Haar pair");
  std::string construct_solver = "lanczos";
  double resolution = 1e-6;
  construct->add_option("--n", n, "Dimension of U and V")->required();
  construct->add_option("--solver", construct_solver)->capture_default_str();
  construct->add_option("--resolution", resolution, "mal(X) must exceed this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* campaign = app.add_subcommand("campaign", "Run (or resume) a Monte Carlo campaign");
  std::string config;
  campaign->add_option("--config", config, "key=value campaign file")->required();

  auto* fit = app.add_subcommand("fit", "Power-law fit of per-n means or variances");
  std::string in, target, ensemble;
  std::size_t min_n = 6;
  fit->add_option("--in", in, "JSON-lines records")->required();
  fit->add_option("--target", target, "mean or variance")->required();
  fit->add_option("--min-n", min_n, "Smallest n used in the fit")->capture_default_str();
  fit->add_option("--ensemble", ensemble, "Restrict to one ensemble kind");

  auto* cloud = app.add_subcommand("cloud", "Eigenvalue cloud as re,im CSV");
  std::size_t samples = 0;
  std::string svg;
  cloud->add_option("--kind", kind, "Ensemble kind")->required();
  cloud->add_option("--n", n, "Dimension")->required();
  cloud->add_option("--samples", samples, "Number of samples")->required();
  cloud->add_option("--svg", svg, "Also write an SVG scatter here");

  auto* selftest = app.add_subcommand("selftest", "Identity and oracle suites");
  std::size_t instances = 100;
  selftest->add_option("--instances", instances, "Random instances per identity")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*mal) return run_mal(g, mal_file, solver);
    if (*sample) return run_sample(g, kind, n, index);
    if (*expander) return run_expander(g, files);
    if (*construct) return run_construct(g, n, construct_solver, resolution);
    if (*campaign) {
      return run_campaign_cmd(g, config, seed_opt->count() > 0, threads_opt->count() > 0,
                              output_opt->count() > 0);
    }
    if (*fit) return run_fit(g, in, target, min_n, ensemble);
    if (*cloud) return run_cloud(g, kind, n, samples, svg);
    if (*selftest) return run_selftest(g, instances);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
