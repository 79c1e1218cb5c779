#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "malnorm/core/errors.hpp"
#include "malnorm/ensembles.hpp"
#include "malnorm/experiments/json_text.hpp"
#include "malnorm/experiments/stats.hpp"
#include "malnorm/malnormality.hpp"

namespace malnorm {

struct CampaignConfig {
  EnsembleKind ensemble = EnsembleKind::ginibre_real;
  std::vector<std::size_t> n_values;
  std::size_t samples_per_n = 1;
  MalSolver solver = MalSolver::dense;
  double tolerance = 1e-8;
  std::string output;
  std::uint64_t seed = 0;
  std::size_t threads = 1;                // 0: all hardware threads
  std::optional<BasisFlavor> flavor;      // default: follows the ensemble's scalar type
  bool record_wall_time = false;          // off keeps the output byte-reproducible
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    const auto x = std::stoull(v, &pos, 10);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw InputError("campaign config: bad integer for '" + key + "': '" + v + "'");
  }
}

// "6,10,15" or "6..20" or a mix: "3..5,10".
inline std::vector<std::size_t> parse_n_list(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_u64(part, "n_values"));
    } else {
      const auto a = parse_u64(trim(part.substr(0, dots)), "n_values");
      const auto b = parse_u64(trim(part.substr(dots + 2)), "n_values");
      if (b < a) throw InputError("campaign config: empty range '" + part + "'");
      for (auto n = a; n <= b; ++n) out.push_back(n);
    }
  }
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("campaign config: bad boolean for '" + key + "': '" + v + "'");
}

}  // namespace detail

inline void validate(const CampaignConfig& c) {
  if (c.n_values.empty()) throw InputError("campaign config: n_values is empty");
  for (std::size_t i = 0; i < c.n_values.size(); ++i) {
    if (c.n_values[i] < 2) throw InputError("campaign config: every n must be at least 2");
    if (i && c.n_values[i] <= c.n_values[i - 1]) {
      throw InputError("campaign config: n_values must be strictly ascending");
    }
    if (c.n_values[i] > 0xffffffffu) throw InputError("campaign config: n too large");
  }
  if (c.samples_per_n < 1) throw InputError("campaign config: samples_per_n must be at least 1");
  if (c.samples_per_n > 0xffffffffu) throw InputError("campaign config: samples_per_n too large");
  if (!(c.tolerance > 0.0)) throw InputError("campaign config: tolerance must be positive");
}

/// Flat key=value text; '#' starts a comment. Unknown keys are errors.
inline CampaignConfig parse_campaign_config(const std::string& text) {
  CampaignConfig c;
  std::set<std::string> seen;
  std::stringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("campaign config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw InputError("campaign config: duplicate key '" + key + "'");
    if (key == "ensemble") {
      c.ensemble = parse_ensemble_kind(val);
    } else if (key == "n_values") {
      c.n_values = detail::parse_n_list(val);
    } else if (key == "samples_per_n") {
      c.samples_per_n = detail::parse_u64(val, key);
    } else if (key == "solver") {
      c.solver = parse_mal_solver(val);
    } else if (key == "tolerance") {
      try {
        std::size_t pos = 0;
        c.tolerance = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError("campaign config: bad tolerance '" + val + "'");
      }
    } else if (key == "output") {
      c.output = val;
    } else if (key == "seed") {
      c.seed = detail::parse_u64(val, key);
    } else if (key == "threads") {
      c.threads = detail::parse_u64(val, key);
    } else if (key == "flavor") {
      c.flavor = parse_basis_flavor(val);
    } else if (key == "record_wall_time") {
      c.record_wall_time = detail::parse_bool(val, key);
    } else {
      throw InputError("campaign config: unknown key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

inline CampaignConfig read_campaign_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open campaign config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_campaign_config(ss.str());
}

// ---------------------------------------------------------------------------
// records

struct ExperimentRecord {
  std::string ensemble;
  std::size_t n = 0;
  std::uint64_t sample_index = 0;
  std::uint64_t seed = 0;
  double mal = 0.0;
  std::string solver;
  bool converged = true;
  double wall_time = 0.0;
};

using RecordKey = std::tuple<std::string, std::size_t, std::uint64_t, std::uint64_t>;

inline RecordKey key_of(const ExperimentRecord& r) {
  return {r.ensemble, r.n, r.sample_index, r.seed};
}

inline Json to_json(const ExperimentRecord& r) {
  return Json{{"converged", r.converged}, {"ensemble", r.ensemble}, {"mal", r.mal},
              {"n", r.n},                 {"sample_index", r.sample_index},
              {"seed", r.seed},           {"solver", r.solver},
              {"wall_time", r.wall_time}};
}

inline ExperimentRecord record_from_json(const Json& j) {
  ExperimentRecord r;
  try {
    r.ensemble = j.at("ensemble").get<std::string>();
    r.n = j.at("n").get<std::size_t>();
    r.sample_index = j.at("sample_index").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mal = j.at("mal").is_null() ? std::nan("") : j.at("mal").get<double>();
    r.solver = j.at("solver").get<std::string>();
    r.converged = j.at("converged").get<bool>();
    r.wall_time = j.at("wall_time").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad record: ") + e.what());
  }
  return r;
}

/// Records from a JSON-lines file. A final line without its newline is a
/// record cut off mid-write and is dropped.
inline std::vector<ExperimentRecord> load_records(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open records file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  std::vector<ExperimentRecord> out;
  std::size_t pos = 0, lineno = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    ++lineno;
    const std::string line = detail::trim(std::string_view(text).substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// running

struct CampaignOutcome {
  std::size_t requested = 0;
  std::size_t computed = 0;
  std::size_t skipped = 0;  // already present in the output file
  std::size_t failed = 0;   // computed with converged = false
};

/// One sample: draw from the ensemble's (seed, n, index) stream and compute mal.
/// Solver failures become converged = false records.
inline ExperimentRecord compute_record(const CampaignConfig& c, std::size_t n, std::uint64_t index) {
  ExperimentRecord r;
  r.ensemble = std::string(to_string(c.ensemble));
  r.n = n;
  r.sample_index = index;
  r.seed = c.seed;
  r.solver = std::string(to_string(c.solver));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const AnyMatrix x = sample_ensemble(EnsembleSpec{c.ensemble, n, c.seed}, index);
    const MalResult m = std::visit(
        [&](const auto& xm) {
          return compute_mal(xm, c.solver, c.flavor, c.tolerance,
                             c.seed ^ (sample_stream_index(n, index) * 0x9e3779b97f4a7c15ull));
        },
        x);
    r.mal = m.value;
    r.converged = m.converged && std::isfinite(m.value);
  } catch (const ConvergenceError& e) {
    r.mal = std::max(0.0, e.estimate());
    r.converged = false;
  } catch (const Error&) {
    r.mal = 0.0;
    r.converged = false;
  }
  if (!std::isfinite(r.mal)) r.mal = 0.0;
  if (c.record_wall_time) {
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return r;
}

/// Runs every (n, index) of the config not already present in the output
/// file, appending one JSON line per record in (n, index) order regardless of
/// the thread count. With an empty output path records go only to `sink`.
inline CampaignOutcome run_campaign(const CampaignConfig& c,
                                    const std::function<void(const ExperimentRecord&)>& sink = {}) {
  validate(c);
  std::set<RecordKey> present;
  if (!c.output.empty() && std::filesystem::exists(c.output)) {
    for (const auto& r : load_records(c.output)) present.insert(key_of(r));
    // Drop a partial trailing line so appended records start on a fresh line.
    std::ifstream f(c.output, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto last_nl = text.find_last_of('\n');
    const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
    if (keep != text.size()) std::filesystem::resize_file(c.output, keep);
  }

  const std::string kind(to_string(c.ensemble));
  std::vector<std::pair<std::size_t, std::uint64_t>> tasks;
  CampaignOutcome out;
  for (std::size_t n : c.n_values)
    for (std::uint64_t i = 0; i < c.samples_per_n; ++i) {
      ++out.requested;
      if (present.count({kind, n, i, c.seed})) {
        ++out.skipped;
      } else {
        tasks.emplace_back(n, i);
      }
    }
  if (tasks.empty()) return out;

  std::ofstream file;
  if (!c.output.empty()) {
    if (const auto parent = std::filesystem::path(c.output).parent_path(); !parent.empty()) {
      std::filesystem::create_directories(parent);
    }
    file.open(c.output, std::ios::binary | std::ios::app);
    if (!file) throw InputError("cannot open output '" + c.output + "'");
  }
  auto emit = [&](const ExperimentRecord& r) {
    ++out.computed;
    if (!r.converged) ++out.failed;
    if (file.is_open()) {
      file << to_json_text(to_json(r)) << '\n';
      file.flush();
      if (!file) throw Error("write failed on '" + c.output + "'");
    }
    if (sink) sink(r);
  };

  std::size_t threads = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, tasks.size());
  if (threads <= 1) {
    for (const auto& [n, i] : tasks) emit(compute_record(c, n, i));
    return out;
  }

  // Workers fill slots; this thread writes them out in task order.
  std::vector<std::optional<ExperimentRecord>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<bool> stop{false};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        if (stop.load()) return;
        const std::size_t k = next.fetch_add(1);
        if (k >= tasks.size()) return;
        auto rec = compute_record(c, tasks[k].first, tasks[k].second);
        {
          std::lock_guard lock(mu);
          slots[k] = std::move(rec);
        }
        ready.notify_all();
      }
    });
  }
  try {
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      ExperimentRecord r;
      {
        std::unique_lock lock(mu);
        ready.wait(lock, [&] { return slots[k].has_value(); });
        r = std::move(*slots[k]);
        slots[k].reset();
      }
      emit(r);
    }
  } catch (...) {
    stop = true;
    throw;
  }
  return out;
}

// ---------------------------------------------------------------------------
// statistics from records

/// Summary of the converged records at dimension n (optionally one ensemble).
inline SummaryStats summarize(std::span<const ExperimentRecord> records, std::size_t n,
                              std::optional<std::string> ensemble = {}) {
  std::vector<double> values;
  for (const auto& r : records) {
    if (r.n != n || !r.converged) continue;
    if (ensemble && r.ensemble != *ensemble) continue;
    values.push_back(r.mal);
  }
  if (values.size() < 2) {
    throw InputError("summarize: fewer than 2 converged records at n = " + std::to_string(n));
  }
  return summarize_values(values, n);
}

/// Per-dimension summaries, ascending in n. Dimensions with fewer than two
/// converged records are left out.
inline std::vector<SummaryStats> summarize_by_n(std::span<const ExperimentRecord> records,
                                                std::optional<std::string> ensemble = {}) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& r : records) {
    if (!r.converged) continue;
    if (ensemble && r.ensemble != *ensemble) continue;
    by_n[r.n].push_back(r.mal);
  }
  std::vector<SummaryStats> out;
  for (const auto& [n, v] : by_n)
    if (v.size() >= 2) out.push_back(summarize_values(v, n));
  return out;
}

enum class FitTarget { mean, variance };

inline FitTarget parse_fit_target(std::string_view s) {
  if (s == "mean") return FitTarget::mean;
  if (s == "variance") return FitTarget::variance;
  throw InputError("unknown fit target '" + std::string(s) + "' (mean or variance)");
}

/// Power-law fit of the per-n mean or variance; dimensions below min_n are
/// excluded (small n behaves differently).
inline PowerFit fit_records(std::span<const ExperimentRecord> records, FitTarget target,
                            std::size_t min_n = 6, std::optional<std::string> ensemble = {}) {
  std::vector<double> xs, ys;
  for (const auto& s : summarize_by_n(records, ensemble)) {
    if (s.n < min_n) continue;
    xs.push_back(static_cast<double>(s.n));
    ys.push_back(target == FitTarget::mean ? s.mean : s.variance);
  }
  return fit_power(xs, ys);
}

inline Json to_json(const SummaryStats& s) {
  return Json{{"count", s.count}, {"max", s.max},       {"mean", s.mean}, {"median", s.median},
              {"min", s.min},     {"n", s.n},           {"variance", s.variance}};
}

inline Json to_json(const PowerFit& f) {
  Json ci = Json::object();
  const char* names[3] = {"alpha", "beta", "gamma"};
  for (std::size_t k = 0; k < 3; ++k) ci[names[k]] = Json::array({f.ci95[k][0], f.ci95[k][1]});
  return Json{{"alpha", f.alpha}, {"beta", f.beta},           {"ci95", ci},
              {"converged", f.converged}, {"gamma", f.gamma}, {"iterations", f.iterations},
              {"rss", f.rss}};
}

}  // namespace malnorm
