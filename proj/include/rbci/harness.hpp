#pragma once

// Random-ensemble experiment: for every sample and every kept count, start the
// Newton optimization once from the most occupied natural orbitals and once
// from one-by-one elimination, and record initial and final retained norms.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "rbci/ci_io.hpp"
#include "rbci/ci_tensor.hpp"
#include "rbci/guess.hpp"
#include "rbci/newton.hpp"
#include "rbci/rdm.hpp"
#include "rbci/rotation.hpp"
#include "rbci/seed.hpp"

namespace rbci {

enum class GuessMethod { natural_orbitals, one_by_one };

inline constexpr GuessMethod kGuessMethods[] = {GuessMethod::natural_orbitals, GuessMethod::one_by_one};

inline std::string_view to_string(GuessMethod method) {
  return method == GuessMethod::natural_orbitals ? "no" : "one-by-one";
}

inline GuessMethod parse_guess_method(std::string_view token) {
  if (token == "no") return GuessMethod::natural_orbitals;
  if (token == "one-by-one") return GuessMethod::one_by_one;
  throw std::invalid_argument("unknown guess method '" + std::string(token) + "'");
}

/// Hessian eigenvalues above this count as "not negative definite".
inline constexpr double kDefiniteTolerance = 1e-8;

struct ExperimentConfig {
  int num_orbitals = 12;
  int num_particles = 4;
  std::vector<int> kept_list;  ///< empty: every m from N to M
  int num_samples = 200;
  std::uint64_t master_seed = 1;
  NewtonOptions newton;
  double significance_threshold = 1e-6;  ///< relative to the better value
  int workers = 1;
  bool keep_tensors = false;

  std::vector<int> kept_values() const {
    if (!kept_list.empty()) {
      std::vector<int> sorted = kept_list;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      return sorted;
    }
    std::vector<int> all;
    for (int m = num_particles; m <= num_orbitals; ++m) all.push_back(m);
    return all;
  }

  void validate() const {
    if (num_particles < 1 || num_particles > num_orbitals || num_orbitals > kMaxOrbitals) {
      throw std::invalid_argument("experiment: need 1 <= N <= M <= " + std::to_string(kMaxOrbitals));
    }
    if (num_samples < 1) throw std::invalid_argument("experiment: need at least one sample");
    if (workers < 1) throw std::invalid_argument("experiment: need at least one worker");
    for (int m : kept_values()) {
      if (m < num_particles || m > num_orbitals) {
        throw std::invalid_argument("experiment: kept count " + std::to_string(m) + " outside [N, M]");
      }
    }
  }
};

struct SampleRecord {
  int sample_id = 0;
  int kept = 0;
  GuessMethod method = GuessMethod::natural_orbitals;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  int iterations = 0;
  Status status = Status::max_iter;
  double gradient_norm = 0.0;
  double hessian_max_eigenvalue = 0.0;
  double entropy = 0.0;
};

struct AggregateRow {
  int kept = 0;
  GuessMethod method = GuessMethod::natural_orbitals;
  double initial_min = 0.0, initial_mean = 0.0, initial_max = 0.0;
  double final_min = 0.0, final_mean = 0.0, final_max = 0.0;
  int significantly_better = 0;
  int nondefinite = 0;
};

/// a beats b when a - b exceeds `threshold` times the better of the two.
inline bool significantly_better(double a, double b, double threshold) {
  return a - b > threshold * std::max(a, b);
}

/// Per (m, method) statistics. Depends only on the records, in record order.
inline std::vector<AggregateRow> aggregate_records(const std::vector<SampleRecord>& records,
                                                   double significance_threshold) {
  // (sample, m, method) -> final norm, for the head-to-head comparison
  std::map<std::tuple<int, int, GuessMethod>, double> finals;
  for (const auto& r : records) finals[{r.sample_id, r.kept, r.method}] = r.final_norm;

  std::map<std::pair<int, GuessMethod>, AggregateRow> rows;
  std::map<std::pair<int, GuessMethod>, int> counts;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.kept, r.method);
    auto [it, fresh] = rows.try_emplace(key);
    AggregateRow& row = it->second;
    if (fresh) {
      row.kept = r.kept;
      row.method = r.method;
      row.initial_min = row.final_min = std::numeric_limits<double>::infinity();
      row.initial_max = row.final_max = -std::numeric_limits<double>::infinity();
    }
    row.initial_min = std::min(row.initial_min, r.initial_norm);
    row.initial_max = std::max(row.initial_max, r.initial_norm);
    row.initial_mean += r.initial_norm;
    row.final_min = std::min(row.final_min, r.final_norm);
    row.final_max = std::max(row.final_max, r.final_norm);
    row.final_mean += r.final_norm;
    if (r.hessian_max_eigenvalue > kDefiniteTolerance) ++row.nondefinite;
    const GuessMethod other = r.method == GuessMethod::natural_orbitals ? GuessMethod::one_by_one
                                                                        : GuessMethod::natural_orbitals;
    const auto rival = finals.find({r.sample_id, r.kept, other});
    if (rival != finals.end() &&
        significantly_better(r.final_norm, rival->second, significance_threshold)) {
      ++row.significantly_better;
    }
    ++counts[key];
  }
  std::vector<AggregateRow> out;
  for (auto& [key, row] : rows) {
    row.initial_mean /= counts[key];
    row.final_mean /= counts[key];
    out.push_back(row);
  }
  return out;
}

struct ExperimentResult {
  std::vector<SampleRecord> records;
  std::vector<AggregateRow> aggregates;
  std::vector<CITensor> tensors;  ///< by sample id, only when keep_tensors is set
};

using TensorGenerator = std::function<CITensor(const Seed&)>;

/// Guesses from one-by-one elimination for every kept count from M down to
/// `lowest`; entry i belongs to kept = M - i. Shares the elimination chain.
inline std::vector<Eigen::MatrixXd> one_by_one_sequence(const CITensor& t, int lowest) {
  require_partition(t, lowest);
  const int M = t.num_orbitals();
  std::vector<Eigen::MatrixXd> out;
  Eigen::MatrixXd U = Eigen::MatrixXd::Identity(M, M);
  CITensor work = t;
  out.push_back(proper_rotation(U));
  for (int retained = M; retained > lowest; --retained) {
    const TruncatedRDM1 gamma = truncated_rdm1(work, retained);
    const NaturalBasis basis = natural_basis(gamma.matrix.topLeftCorner(retained, retained));
    Eigen::MatrixXd step = Eigen::MatrixXd::Identity(M, M);
    step.topLeftCorner(retained, retained) = basis.orbitals;
    U = U * step;
    work = rotate_tensor(t, U);
    out.push_back(proper_rotation(U));
  }
  return out;
}

/// All records of one sample, ordered by m and then method.
inline std::vector<SampleRecord> run_single_sample(const CITensor& t, int sample_id,
                                                   const std::vector<int>& kept_values,
                                                   const NewtonOptions& options) {
  const int M = t.num_orbitals();
  const NaturalBasis nb = natural_orbitals(t);
  const double entropy = correlation_entropy(nb.occupations, t.num_particles());
  const Eigen::MatrixXd natural = proper_rotation(nb.orbitals);
  const auto eliminated = one_by_one_sequence(t, kept_values.front());

  std::vector<SampleRecord> out;
  for (int m : kept_values) {
    for (GuessMethod method : kGuessMethods) {
      const Eigen::MatrixXd& start =
          method == GuessMethod::natural_orbitals ? natural : eliminated[static_cast<std::size_t>(M - m)];
      const OptimizationReport report = newton_trust_region(t, m, start, options);
      SampleRecord record;
      record.sample_id = sample_id;
      record.kept = m;
      record.method = method;
      record.initial_norm = report.initial_norm;
      record.final_norm = report.retained_norm;
      record.iterations = report.iterations;
      record.status = report.status;
      record.gradient_norm = report.gradient_norm;
      record.hessian_max_eigenvalue = report.hessian_max_eigenvalue;
      record.entropy = entropy;
      out.push_back(record);
    }
  }
  return out;
}

/// Runs the ensemble. Each sample draws from its own sub-seed and results are
/// stored by sample id, so the output does not depend on the worker count.
inline ExperimentResult run_sample_experiment(const ExperimentConfig& config,
                                              const TensorGenerator& generator = {}) {
  config.validate();
  const std::vector<int> kept_values = config.kept_values();
  const TensorGenerator make = generator ? generator : [&config](const Seed& seed) {
    return random_tensor(config.num_orbitals, config.num_particles, seed);
  };

  const auto count = static_cast<std::size_t>(config.num_samples);
  std::vector<std::vector<SampleRecord>> per_sample(count);
  std::vector<std::optional<CITensor>> tensors(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        CITensor t = make(Seed{config.master_seed, i});
        if (t.num_orbitals() != config.num_orbitals || t.num_particles() != config.num_particles) {
          throw std::invalid_argument("experiment: generated tensor has wrong shape");
        }
        per_sample[i] = run_single_sample(t, static_cast<int>(i), kept_values, config.newton);
        if (config.keep_tensors) tensors[i] = std::move(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };

  const int threads = std::min<int>(config.workers, config.num_samples);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  for (auto& records : per_sample) {
    result.records.insert(result.records.end(), records.begin(), records.end());
  }
  result.aggregates = aggregate_records(result.records, config.significance_threshold);
  if (config.keep_tensors) {
    for (auto& t : tensors) result.tensors.push_back(std::move(*t));
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kRecordsHeader =
    "sample_id,m,method,n_initial,n_final,iterations,status,grad_norm_final,hessian_max_eig,entropy";
inline constexpr std::string_view kAggregateHeader =
    "m,method,n_init_min,n_init_mean,n_init_max,n_final_min,n_final_mean,n_final_max,"
    "sig_better_count,nondefinite_count";

inline std::string records_to_csv(const std::vector<SampleRecord>& records) {
  std::string out(kRecordsHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.sample_id) + ',' + std::to_string(r.kept) + ',' +
           std::string(to_string(r.method)) + ',' + format_double(r.initial_norm) + ',' +
           format_double(r.final_norm) + ',' + std::to_string(r.iterations) + ',' +
           std::string(to_string(r.status)) + ',' + format_double(r.gradient_norm) + ',' +
           format_double(r.hessian_max_eigenvalue) + ',' + format_double(r.entropy) + '\n';
  }
  return out;
}

inline std::string aggregates_to_csv(const std::vector<AggregateRow>& rows) {
  std::string out(kAggregateHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.kept) + ',' + std::string(to_string(r.method)) + ',' +
           format_double(r.initial_min) + ',' + format_double(r.initial_mean) + ',' +
           format_double(r.initial_max) + ',' + format_double(r.final_min) + ',' +
           format_double(r.final_mean) + ',' + format_double(r.final_max) + ',' +
           std::to_string(r.significantly_better) + ',' + std::to_string(r.nondefinite) + '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    // stod rejects "inf"/"-inf" on some platforms' out_of_range paths; handle explicitly
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument(where + ": bad number '" + text + "'");
  }
  return value;
}

inline int parse_int(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument(where + ": bad integer '" + text + "'");
  return value;
}

}  // namespace detail

inline std::vector<SampleRecord> records_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader) {
    throw std::invalid_argument("records CSV: unexpected header");
  }
  std::vector<SampleRecord> records;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = "records CSV line " + std::to_string(line_number);
    const auto f = detail::split_csv_line(line);
    if (f.size() != 10) throw std::invalid_argument(where + ": expected 10 fields");
    SampleRecord r;
    r.sample_id = detail::parse_int(f[0], where);
    r.kept = detail::parse_int(f[1], where);
    r.method = parse_guess_method(f[2]);
    r.initial_norm = detail::parse_double(f[3], where);
    r.final_norm = detail::parse_double(f[4], where);
    r.iterations = detail::parse_int(f[5], where);
    r.status = parse_status(f[6]);
    r.gradient_norm = detail::parse_double(f[7], where);
    r.hessian_max_eigenvalue = detail::parse_double(f[8], where);
    r.entropy = detail::parse_double(f[9], where);
    records.push_back(r);
  }
  return records;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

// ---------------------------------------------------------------------------
// Analyses

struct WorstCaseReport {
  int sample_id = 0;
  int kept = 0;
  double final_norm = 0.0;
  Eigen::VectorXd occupations;
  SubsetContributions contributions;  ///< over the top natural orbitals, in NO basis
};

using TensorLookup = std::function<CITensor(int sample_id)>;

/// Sample with the lowest final norm from the natural-orbital start at the
/// smallest kept count, with its occupations and the norm carried by each
/// pattern of its `top_set_size` most occupied natural orbitals.
inline WorstCaseReport worst_case_report(const std::vector<SampleRecord>& records,
                                         const TensorLookup& tensors, int top_set_size) {
  const SampleRecord* worst = nullptr;
  int lowest_kept = std::numeric_limits<int>::max();
  for (const auto& r : records) {
    if (r.method == GuessMethod::natural_orbitals) lowest_kept = std::min(lowest_kept, r.kept);
  }
  for (const auto& r : records) {
    if (r.method != GuessMethod::natural_orbitals || r.kept != lowest_kept) continue;
    if (worst == nullptr || r.final_norm < worst->final_norm ||
        (r.final_norm == worst->final_norm && r.sample_id < worst->sample_id)) {
      worst = &r;
    }
  }
  if (worst == nullptr) throw std::invalid_argument("worst_case_report: no natural-orbital records");

  const CITensor t = tensors(worst->sample_id);
  if (top_set_size < 0 || top_set_size > t.num_orbitals()) {
    throw std::invalid_argument("worst_case_report: top set size out of range");
  }
  const NaturalBasis nb = natural_orbitals(t);
  const CITensor in_no_basis = rotate_tensor(t, nb.orbitals);
  std::vector<int> top(static_cast<std::size_t>(top_set_size));
  for (int i = 0; i < top_set_size; ++i) top[static_cast<std::size_t>(i)] = i;
  return {worst->sample_id, worst->kept, worst->final_norm, nb.occupations,
          subset_contributions(in_no_basis, top)};
}

/// "k,n_k" rows, 1-based.
inline std::string format_occupation_table(const Eigen::VectorXd& occupations) {
  std::string out = "k,n_k\n";
  for (Eigen::Index k = 0; k < occupations.size(); ++k) {
    out += std::to_string(k + 1) + ',' + format_double(occupations(k)) + '\n';
  }
  return out;
}

/// "NOs,contribution" rows: subsets by decreasing size, then lexicographic;
/// labels are 1-based orbital lists joined by spaces, "0" for the empty set.
inline std::string format_contribution_table(const SubsetContributions& contributions) {
  const std::size_t width = contributions.orbitals.size();
  std::vector<std::size_t> masks(contributions.values.size());
  for (std::size_t i = 0; i < masks.size(); ++i) masks[i] = i;
  auto members = [&](std::size_t mask) {
    std::vector<int> list;
    for (std::size_t b = 0; b < width; ++b) {
      if (mask & (std::size_t{1} << b)) list.push_back(contributions.orbitals[b] + 1);
    }
    return list;
  };
  std::sort(masks.begin(), masks.end(), [&](std::size_t a, std::size_t b) {
    const auto ma = members(a);
    const auto mb = members(b);
    if (ma.size() != mb.size()) return ma.size() > mb.size();
    return ma < mb;
  });
  std::string out = "NOs,contribution\n";
  for (std::size_t mask : masks) {
    const auto list = members(mask);
    std::string label;
    for (std::size_t i = 0; i < list.size(); ++i) label += (i ? " " : "") + std::to_string(list[i]);
    if (label.empty()) label = "0";
    out += label + ',' + format_double(contributions.values[mask]) + '\n';
  }
  return out;
}

struct ScatterRow {
  int sample_id = 0;
  double entropy = 0.0;
  double initial_difference = 0.0;  ///< one-by-one minus NO; positive: one-by-one ahead
  double final_difference = 0.0;
};

/// Entropy against the head-to-head differences of the two starts at one kept count.
inline std::vector<ScatterRow> entropy_scatter(const std::vector<SampleRecord>& records, int kept) {
  std::map<int, std::pair<const SampleRecord*, const SampleRecord*>> pairs;
  for (const auto& r : records) {
    if (r.kept != kept) continue;
    auto& slot = pairs[r.sample_id];
    (r.method == GuessMethod::natural_orbitals ? slot.first : slot.second) = &r;
  }
  std::vector<ScatterRow> rows;
  for (const auto& [id, pair] : pairs) {
    if (pair.first == nullptr || pair.second == nullptr) {
      throw std::invalid_argument("entropy_scatter: sample " + std::to_string(id) + " lacks a method");
    }
    rows.push_back({id, pair.first->entropy, pair.second->initial_norm - pair.first->initial_norm,
                    pair.second->final_norm - pair.first->final_norm});
  }
  return rows;
}

inline std::string scatter_to_csv(const std::vector<ScatterRow>& rows) {
  std::string out = "sample_id,entropy,delta_initial,delta_final\n";
  for (const auto& r : rows) {
    out += std::to_string(r.sample_id) + ',' + format_double(r.entropy) + ',' +
           format_double(r.initial_difference) + ',' + format_double(r.final_difference) + '\n';
  }
  return out;
}

}  // namespace rbci
