// rbci: command-line driver for reduced-basis CI truncation.
//
//   rbci gen --orbitals M --particles N --seed S --out FILE
//   rbci optimize --in FILE --keep m --guess {no|one-by-one|identity|both}
//   rbci sample --orbitals M --particles N --samples K --seed S --out-records R --out-aggregate A
//   rbci analyze --records R --worst-case --top-set 4
//   rbci entropy --in FILE

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rbci/rbci.hpp"

namespace fs = std::filesystem;
using namespace rbci;

namespace {

CITensor load_with_warnings(const std::string& path) {
  std::vector<std::string> warnings;
  CITensor t = load_ci_file(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return t;
}

fs::path tensor_path(const fs::path& dir, int sample_id) {
  return dir / ("sample_" + std::to_string(sample_id) + ".json");
}

fs::path default_tensor_dir(const std::string& records) { return fs::path(records + ".tensors"); }

struct OptimizeArgs {
  std::string input;
  int kept = 0;
  std::string guess = "both";
  NewtonOptions newton;
  std::string report;
};

int run_optimize(const OptimizeArgs& args) {
  const CITensor t = load_with_warnings(args.input);
  require_partition(t, args.kept);
  const int M = t.num_orbitals();
  const double entropy = correlation_entropy(natural_orbitals(t).occupations, t.num_particles());

  std::vector<std::pair<std::string, Eigen::MatrixXd>> starts;
  if (args.guess == "no" || args.guess == "both") starts.emplace_back("no", highest_no_guess(t, args.kept));
  if (args.guess == "one-by-one" || args.guess == "both") {
    starts.emplace_back("one-by-one", one_by_one_elimination(t, args.kept));
  }
  if (args.guess == "identity") starts.emplace_back("identity", Eigen::MatrixXd::Identity(M, M));

  std::string csv = "guess,m,n_initial,n_final,iterations,status,grad_norm_final,hessian_max_eig,entropy\n";
  for (const auto& [name, start] : starts) {
    const OptimizationReport r = newton_trust_region(t, args.kept, start, args.newton);
    std::cout << "guess: " << name << '\n'
              << "  n_initial:       " << format_double(r.initial_norm) << '\n'
              << "  n_final:         " << format_double(r.retained_norm) << '\n'
              << "  iterations:      " << r.iterations << '\n'
              << "  status:          " << to_string(r.status) << '\n'
              << "  grad_norm_final: " << format_double(r.gradient_norm) << '\n'
              << "  hessian_max_eig: " << format_double(r.hessian_max_eigenvalue) << '\n';
    csv += name + ',' + std::to_string(args.kept) + ',' + format_double(r.initial_norm) + ',' +
           format_double(r.retained_norm) + ',' + std::to_string(r.iterations) + ',' +
           std::string(to_string(r.status)) + ',' + format_double(r.gradient_norm) + ',' +
           format_double(r.hessian_max_eigenvalue) + ',' + format_double(entropy) + '\n';
  }
  if (!args.report.empty()) write_text_file(args.report, csv);
  return 0;
}

struct SampleArgs {
  ExperimentConfig config;
  std::string records;
  std::string aggregate;
};

int run_sample(const SampleArgs& args) {
  const ExperimentResult result = run_sample_experiment(args.config);
  write_text_file(args.records, records_to_csv(result.records));
  write_text_file(args.aggregate, aggregates_to_csv(result.aggregates));
  if (args.config.keep_tensors) {
    const fs::path dir = default_tensor_dir(args.records);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < result.tensors.size(); ++i) {
      save_ci_file(result.tensors[i], tensor_path(dir, static_cast<int>(i)));
    }
  }
  std::cout << "wrote " << result.records.size() << " records and " << result.aggregates.size()
            << " aggregate rows\n";
  return 0;
}

struct AnalyzeArgs {
  std::string records;
  bool worst_case = false;
  int top_set = 4;
  std::string tensor_dir;
  std::string scatter;
  int scatter_kept = 0;
};

int run_analyze(const AnalyzeArgs& args) {
  std::ifstream in(args.records);
  if (!in) throw std::runtime_error(args.records + ": cannot open");
  const auto records = records_from_csv(in);
  if (records.empty()) throw std::invalid_argument(args.records + ": no records");

  if (args.worst_case) {
    const fs::path dir = args.tensor_dir.empty() ? default_tensor_dir(args.records) : fs::path(args.tensor_dir);
    const auto report = worst_case_report(
        records, [&](int id) { return load_with_warnings(tensor_path(dir, id).string()); }, args.top_set);
    std::cout << "worst case: sample " << report.sample_id << ", m = " << report.kept
              << ", n_final = " << format_double(report.final_norm) << "\n\n"
              << "natural orbital occupations\n"
              << format_occupation_table(report.occupations) << '\n'
              << "contributions of the top " << args.top_set << " natural orbitals\n"
              << format_contribution_table(report.contributions);
  }
  if (!args.scatter.empty()) {
    int kept = args.scatter_kept;
    if (kept == 0) {
      kept = records.front().kept;
      for (const auto& r : records) kept = std::min(kept, r.kept);
    }
    write_text_file(args.scatter, scatter_to_csv(entropy_scatter(records, kept)));
  }
  if (!args.worst_case && args.scatter.empty()) {
    std::cout << aggregates_to_csv(aggregate_records(records, 1e-6));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-basis truncation of CI wave functions"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int orbitals = 12, particles = 4;
  std::string out;
  auto* gen = app.add_subcommand("gen", "write a random CI file");
  gen->add_option("--orbitals", orbitals, "number of orbitals M")->required();
  gen->add_option("--particles", particles, "number of particles N")->required();
  gen->add_option("--seed", seed, "random seed")->required();
  gen->add_option("--out", out, "output CI file")->required();

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "maximize the retained norm for one CI file");
  optimize->add_option("--in", opt.input, "CI file")->required()->check(CLI::ExistingFile);
  optimize->add_option("--keep", opt.kept, "number of kept orbitals m")->required();
  optimize->add_option("--guess", opt.guess, "starting orbitals")
      ->check(CLI::IsMember({"no", "one-by-one", "identity", "both"}))
      ->capture_default_str();
  optimize->add_option("--tol", opt.newton.gradient_tol, "gradient norm tolerance")->capture_default_str();
  optimize->add_option("--max-iter", opt.newton.max_iter, "Newton iteration limit")->capture_default_str();
  optimize->add_option("--report", opt.report, "write results as CSV");

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "run the random-ensemble experiment");
  sample->add_option("--orbitals", smp.config.num_orbitals, "number of orbitals M")->capture_default_str();
  sample->add_option("--particles", smp.config.num_particles, "number of particles N")->capture_default_str();
  sample->add_option("--samples", smp.config.num_samples, "number of random tensors")->capture_default_str();
  sample->add_option("--seed", smp.config.master_seed, "master seed")->capture_default_str();
  sample->add_option("--keep-list", smp.config.kept_list, "kept orbital counts (default N..M)")->delimiter(',');
  sample->add_flag("--keep-tensors", smp.config.keep_tensors, "store tensors next to the records CSV");
  sample->add_option("--workers", smp.config.workers, "worker threads")->capture_default_str();
  sample->add_option("--tol", smp.config.newton.gradient_tol, "gradient norm tolerance")->capture_default_str();
  sample->add_option("--max-iter", smp.config.newton.max_iter, "Newton iteration limit")->capture_default_str();
  sample->add_option("--significance", smp.config.significance_threshold, "relative significance threshold")
      ->capture_default_str();
  sample->add_option("--out-records", smp.records, "records CSV")->required();
  sample->add_option("--out-aggregate", smp.aggregate, "aggregate CSV")->required();

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "analyses of a records CSV");
  analyze->add_option("--records", ana.records, "records CSV")->required()->check(CLI::ExistingFile);
  analyze->add_flag("--worst-case", ana.worst_case, "report the worst natural-orbital start");
  analyze->add_option("--top-set", ana.top_set, "natural orbitals in the contribution table")->capture_default_str();
  analyze->add_option("--tensor-dir", ana.tensor_dir, "stored tensors (default <records>.tensors)");
  analyze->add_option("--entropy-scatter", ana.scatter, "write entropy vs. guess difference CSV");
  analyze->add_option("--scatter-keep", ana.scatter_kept, "kept count for the scatter (default smallest)");

  std::string entropy_input;
  auto* entropy = app.add_subcommand("entropy", "print occupations and correlation entropy");
  entropy->add_option("--in", entropy_input, "CI file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      save_ci_file(random_tensor(orbitals, particles, Seed{seed, 0}), out);
      return 0;
    }
    if (*optimize) return run_optimize(opt);
    if (*sample) return run_sample(smp);
    if (*analyze) return run_analyze(ana);
    if (*entropy) {
      const CITensor t = load_with_warnings(entropy_input);
      const NaturalBasis nb = natural_orbitals(t);
      std::cout << format_occupation_table(nb.occupations)
                << "S_cor," << format_double(correlation_entropy(nb.occupations, t.num_particles())) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
