#include "ovfit/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "ovfit/error.hpp"
#include "ovfit/seed.hpp"
#include "ovfit/stats_core.hpp"
#include "ovfit/synthetic_linear.hpp"

namespace ovfit {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json real_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double real_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

fs::path cell_path(const ExperimentConfig& cfg, std::size_t e, std::size_t r) {
  char name[64];
  std::snprintf(name, sizeof name, "e%03zu_r%04zu.json", e, r);
  return cfg.output_dir / "cells" / name;
}

json cell_key(const ExperimentConfig& cfg, std::size_t e, std::size_t r) {
  return {{"scenario", synthetic::to_string(cfg.scenario)},
          {"epsilon", cfg.epsilon_grid[e]},
          {"seed", cell_seed(cfg.base_seed, e, r)},
          {"steps", cfg.steps},
          {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate}};
}

json record_to_json(const RunRecord& r) {
  return {{"scenario", r.scenario},
          {"epsilon", r.epsilon},
          {"seed", r.seed},
          {"p_value", r.p_value},
          {"basic_test_reject", r.basic_test_reject},
          {"r_hat_s", r.r_hat_s},
          {"r_hat_g", r.r_hat_g},
          {"r_hat_s_prime", r.r_hat_s_prime},
          {"sigma_t2", r.sigma_t2},
          {"avg_weight_misclassified", real_or_null(r.avg_weight_misclassified)},
          {"avg_weight_successful_adv", real_or_null(r.avg_weight_successful_adv)},
          {"true_risk_estimate", r.true_risk_estimate}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.scenario = j.at("scenario").get<std::string>();
  r.epsilon = j.at("epsilon").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.p_value = j.at("p_value").get<double>();
  r.basic_test_reject = j.at("basic_test_reject").get<bool>();
  r.r_hat_s = j.at("r_hat_s").get<double>();
  r.r_hat_g = j.at("r_hat_g").get<double>();
  r.r_hat_s_prime = j.at("r_hat_s_prime").get<double>();
  r.sigma_t2 = j.at("sigma_t2").get<double>();
  r.avg_weight_misclassified = real_from(j.at("avg_weight_misclassified"));
  r.avg_weight_successful_adv = real_from(j.at("avg_weight_successful_adv"));
  r.true_risk_estimate = j.at("true_risk_estimate").get<double>();
  return r;
}

void save_cell(const ExperimentConfig& cfg, const CellResult& c) {
  json sparse = json::array();
  for (std::size_t i = 0; i < c.t_values.size(); ++i) {
    if (c.t_values[i] != 0.0) sparse.push_back({i, c.t_values[i]});
  }
  const json j = {{"key", cell_key(cfg, c.epsilon_index, c.run_index)},
                  {"record", record_to_json(c.record)},
                  {"m", c.t_values.size()},
                  {"t_sparse", sparse},
                  {"audit", {{"g1", c.g1_violations}, {"g2", c.g2_violations}, {"checked", c.audited}}}};
  const fs::path path = cell_path(cfg, c.epsilon_index, c.run_index);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out = open_out(tmp);
    out << j.dump() << '\n';
    finish(out, tmp);
  }
  fs::rename(tmp, path);
}

// Returns false when the file is absent, unreadable, or was produced with
// different parameters.
bool try_load_cell(const ExperimentConfig& cfg, std::size_t e, std::size_t r, CellResult& out) {
  const fs::path path = cell_path(cfg, e, r);
  std::ifstream in(path);
  if (!in) return false;
  try {
    const json j = json::parse(in);
    if (j.at("key") != cell_key(cfg, e, r)) return false;
    out.epsilon_index = e;
    out.run_index = r;
    out.record = record_from_json(j.at("record"));
    out.t_values.assign(j.at("m").get<std::size_t>(), 0.0);
    for (const auto& pair : j.at("t_sparse")) {
      const auto i = pair.at(0).get<std::size_t>();
      if (i >= out.t_values.size()) return false;
      out.t_values[i] = pair.at(1).get<double>();
    }
    out.g1_violations = j.at("audit").at("g1").get<std::size_t>();
    out.g2_violations = j.at("audit").at("g2").get<std::size_t>();
    out.audited = j.at("audit").at("checked").get<std::size_t>();
    return true;
  } catch (const json::exception&) {
    return false;
  }
}

CellResult compute_cell(const ExperimentConfig& cfg, std::size_t e, std::size_t r, bool inner_parallel) {
  synthetic::ScenarioOptions opts = cfg.scenario_options();
  opts.parallel = inner_parallel;
  const double eps = cfg.epsilon_grid[e];
  const std::uint64_t seed = cell_seed(cfg.base_seed, e, r);
  try {
    synthetic::RunResult res = synthetic::run_scenario(cfg.scenario, eps, seed, opts);
    CellResult c;
    c.epsilon_index = e;
    c.run_index = r;
    c.record = std::move(res.record);
    c.t_values = std::move(res.t_values);
    c.g1_violations = res.audit.count(Condition::G1);
    c.g2_violations = res.audit.count(Condition::G2);
    c.audited = res.audit.checked;
    return c;
  } catch (const Error& err) {
    throw Error(err.kind(), "epsilon " + fmt12(eps) + ", seed " + std::to_string(seed) + ": " + err.what());
  }
}

Band band(std::vector<double> xs) {
  std::erase_if(xs, [](double x) { return std::isnan(x); });
  if (xs.empty()) return {kNaN, kNaN, kNaN};
  std::sort(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  return {sum / static_cast<double>(xs.size()), percentile(xs, 0.025), percentile(xs, 0.975)};
}

void write_table(const fs::path& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  out << "# " << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << fmt12(row[i]);
    out << '\n';
  }
  finish(out, path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, const char* column) {
  if (s == "nan") return kNaN;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(ErrorKind::Io, std::string("malformed ") + column + " '" + s + "'");
  return v;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t epsilon_index, std::size_t run_index) {
  return derive_seed(base_seed, {epsilon_index, run_index});
}

std::vector<CellResult> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment != Experiment::Synthetic) throw Error(ErrorKind::Config, "experiment: run_sweep needs synthetic");
  fs::create_directories(cfg.output_dir / "cells");

  const std::size_t n_eps = cfg.epsilon_grid.size();
  const auto n_runs = static_cast<std::size_t>(cfg.runs);
  const std::size_t total = n_eps * n_runs;
  std::vector<CellResult> cells(total);
  std::vector<char> done(total, 0);
  for (std::size_t k = 0; k < total; ++k) done[k] = try_load_cell(cfg, k / n_runs, k % n_runs, cells[k]) ? 1 : 0;

  const int threads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
  const bool inner_parallel = threads == 1;
  std::exception_ptr failure;
  std::size_t failure_index = total;
  const auto n = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (done[k]) continue;
    try {
      cells[k] = compute_cell(cfg, k / n_runs, k % n_runs, inner_parallel);
#pragma omp critical(ovfit_sweep_writer)
      save_cell(cfg, cells[k]);
    } catch (...) {
#pragma omp critical(ovfit_sweep_failure)
      if (k < failure_index) {
        failure_index = k;
        failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return cells;
}

std::vector<CellResult> load_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto n_runs = static_cast<std::size_t>(cfg.runs);
  std::vector<CellResult> cells(cfg.epsilon_grid.size() * n_runs);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!try_load_cell(cfg, k / n_runs, k % n_runs, cells[k])) {
      throw Error(ErrorKind::Io, "missing or stale cell " + cell_path(cfg, k / n_runs, k % n_runs).string());
    }
  }
  return cells;
}

Histogram p_value_histogram(std::span<const double> p_values) {
  Histogram h{};
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::RangeViolation, "p-value outside [0, 1]");
    const auto bin = std::min(kHistogramBins - 1, static_cast<std::size_t>(p * static_cast<double>(kHistogramBins)));
    ++h[bin];
  }
  return h;
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::EmptySample, "percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::InvalidParameter, "quantile must lie in [0, 1]");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary aggregate(std::span<const CellResult> cells, std::span<const int> n_model_bins, double range_u, double delta) {
  if (cells.empty()) throw Error(ErrorKind::EmptySample, "no records to aggregate");
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::vector<const CellResult*>> groups;
  for (const auto& c : cells) {
    const auto key = std::make_pair(c.record.scenario, c.record.epsilon);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&c);
  }

  Summary summary;
  for (const auto& key : keys) {
    auto group = groups[key];
    std::stable_sort(group.begin(), group.end(),
                     [](const CellResult* a, const CellResult* b) { return a->run_index < b->run_index; });
    SummaryRow row;
    row.scenario = key.first;
    row.epsilon = key.second;
    row.runs = group.size();

    std::vector<double> p, rs, rg, rsp, risk, wm, ws;
    std::size_t pairwise_rejects = 0, basic_rejects = 0;
    for (const CellResult* c : group) {
      const RunRecord& r = c->record;
      p.push_back(r.p_value);
      rs.push_back(r.r_hat_s);
      rg.push_back(r.r_hat_g);
      rsp.push_back(r.r_hat_s_prime);
      risk.push_back(r.true_risk_estimate);
      wm.push_back(r.avg_weight_misclassified);
      ws.push_back(r.avg_weight_successful_adv);
      pairwise_rejects += r.p_value <= delta ? 1 : 0;
      basic_rejects += r.basic_test_reject ? 1 : 0;
    }
    std::vector<double> sorted_p = p;
    std::sort(sorted_p.begin(), sorted_p.end());
    const Band pb = band(p);
    row.mean_p = pb.mean;
    row.p_lo = pb.lo;
    row.p_hi = pb.hi;
    row.p_min = sorted_p.front();
    row.p_max = sorted_p.back();
    row.median_p = percentile(sorted_p, 0.5);
    row.pairwise_reject_rate = static_cast<double>(pairwise_rejects) / static_cast<double>(row.runs);
    row.basic_reject_rate = static_cast<double>(basic_rejects) / static_cast<double>(row.runs);
    row.r_hat_s = band(rs);
    row.r_hat_g = band(rg);
    row.r_hat_s_prime = band(rsp);
    row.true_risk = band(risk);
    row.weight_misclassified = band(wm);
    row.weight_successful_adv = band(ws);
    row.histogram = p_value_histogram(p);

    for (int n : n_model_bins) {
      if (n < 1) throw Error(ErrorKind::InvalidParameter, "N-model bin size must be >= 1");
      if (static_cast<std::size_t>(n) > row.runs) {
        throw Error(ErrorKind::InsufficientRuns, std::to_string(row.runs) + " runs at epsilon " + fmt12(row.epsilon) +
                                                     " cannot fill a bin of " + std::to_string(n));
      }
      NModelCell cell;
      cell.n = n;
      for (std::size_t b = 0; b + static_cast<std::size_t>(n) <= row.runs; b += static_cast<std::size_t>(n)) {
        std::vector<std::vector<double>> rows;
        for (std::size_t j = b; j < b + static_cast<std::size_t>(n); ++j) rows.push_back(group[j]->t_values);
        cell.p_values.push_back(n_model_test(rows, range_u, delta).p_value);
      }
      double sum = 0.0;
      for (double v : cell.p_values) sum += v;
      cell.mean = sum / static_cast<double>(cell.p_values.size());
      cell.min = *std::min_element(cell.p_values.begin(), cell.p_values.end());
      cell.max = *std::max_element(cell.p_values.begin(), cell.p_values.end());
      cell.histogram = p_value_histogram(cell.p_values);
      row.n_model.push_back(std::move(cell));
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

const char* const kRecordCsvHeader =
    "scenario,epsilon,seed,p_value,basic_test_reject,r_hat_s,r_hat_g,r_hat_s_prime,sigma_t2,"
    "avg_weight_misclassified,avg_weight_successful_adv,true_risk_estimate";

void write_records_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << kRecordCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.scenario << ',' << fmt12(r.epsilon) << ',' << r.seed << ',' << fmt12(r.p_value) << ','
        << (r.basic_test_reject ? 1 : 0) << ',' << fmt12(r.r_hat_s) << ',' << fmt12(r.r_hat_g) << ','
        << fmt12(r.r_hat_s_prime) << ',' << fmt12(r.sigma_t2) << ',' << fmt12(r.avg_weight_misclassified) << ','
        << fmt12(r.avg_weight_successful_adv) << ',' << fmt12(r.true_risk_estimate) << '\n';
  }
}

void emit_csv(std::span<const RunRecord> records, const fs::path& path) {
  std::ofstream out = open_out(path);
  write_records_csv(out, records);
  finish(out, path);
}

std::vector<RunRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordCsvHeader) throw Error(ErrorKind::Io, "unexpected CSV header");
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12) throw Error(ErrorKind::Io, "expected 12 columns, got " + std::to_string(f.size()));
    RunRecord r;
    r.scenario = f[0];
    r.epsilon = parse_real(f[1], "epsilon");
    try {
      std::size_t used = 0;
      r.seed = std::stoull(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Io, "malformed seed '" + f[2] + "'");
    }
    r.p_value = parse_real(f[3], "p_value");
    if (f[4] != "0" && f[4] != "1") throw Error(ErrorKind::Io, "malformed basic_test_reject '" + f[4] + "'");
    r.basic_test_reject = f[4] == "1";
    r.r_hat_s = parse_real(f[5], "r_hat_s");
    r.r_hat_g = parse_real(f[6], "r_hat_g");
    r.r_hat_s_prime = parse_real(f[7], "r_hat_s_prime");
    r.sigma_t2 = parse_real(f[8], "sigma_t2");
    r.avg_weight_misclassified = parse_real(f[9], "avg_weight_misclassified");
    r.avg_weight_successful_adv = parse_real(f[10], "avg_weight_successful_adv");
    r.true_risk_estimate = parse_real(f[11], "true_risk_estimate");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> load_records_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_records_csv(in);
}

void emit_csv(const Summary& summary, const fs::path& dir) {
  {
    const fs::path path = dir / "summary.csv";
    std::ofstream out = open_out(path);
    out << "scenario,epsilon,runs,mean_p,p_lo,p_hi,p_min,p_max,median_p,pairwise_reject_rate,basic_reject_rate,"
           "r_hat_s,r_hat_g,r_hat_s_prime,true_risk,avg_weight_misclassified,avg_weight_successful_adv\n";
    for (const auto& r : summary.rows) {
      out << r.scenario << ',' << fmt12(r.epsilon) << ',' << r.runs << ',' << fmt12(r.mean_p) << ','
          << fmt12(r.p_lo) << ',' << fmt12(r.p_hi) << ',' << fmt12(r.p_min) << ',' << fmt12(r.p_max) << ','
          << fmt12(r.median_p) << ',' << fmt12(r.pairwise_reject_rate) << ',' << fmt12(r.basic_reject_rate) << ','
          << fmt12(r.r_hat_s.mean) << ',' << fmt12(r.r_hat_g.mean) << ',' << fmt12(r.r_hat_s_prime.mean) << ','
          << fmt12(r.true_risk.mean) << ',' << fmt12(r.weight_misclassified.mean) << ','
          << fmt12(r.weight_successful_adv.mean) << '\n';
    }
    finish(out, path);
  }
  const fs::path path = dir / "nmodel.csv";
  std::ofstream out = open_out(path);
  out << "scenario,epsilon,n,bin,p_value\n";
  for (const auto& r : summary.rows) {
    for (const auto& c : r.n_model) {
      for (std::size_t b = 0; b < c.p_values.size(); ++b) {
        out << r.scenario << ',' << fmt12(r.epsilon) << ',' << c.n << ',' << b << ',' << fmt12(c.p_values[b]) << '\n';
      }
    }
  }
  finish(out, path);
}

void emit_plot_data(const Summary& summary, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::vector<double>> pv, est, dens;
  std::map<int, std::vector<std::vector<double>>> per_n;
  for (const auto& r : summary.rows) {
    pv.push_back({r.epsilon, r.mean_p, r.p_lo, r.p_hi});
    est.push_back({r.epsilon, r.r_hat_s.mean, r.r_hat_s.lo, r.r_hat_s.hi, r.r_hat_g.mean, r.r_hat_g.lo, r.r_hat_g.hi,
                   r.r_hat_s_prime.mean, r.r_hat_s_prime.lo, r.r_hat_s_prime.hi, r.true_risk.mean, r.true_risk.lo,
                   r.true_risk.hi});
    dens.push_back({r.epsilon, r.weight_misclassified.mean, r.weight_misclassified.lo, r.weight_misclassified.hi,
                    r.weight_successful_adv.mean, r.weight_successful_adv.lo, r.weight_successful_adv.hi});
    for (const auto& c : r.n_model) per_n[c.n].push_back({r.epsilon, c.mean, c.min, c.max});
  }
  write_table(dir / "pvalue_vs_epsilon.dat", "epsilon mean_p p_lo p_hi", pv);
  for (const auto& [n, rows] : per_n) {
    write_table(dir / ("pvalue_vs_epsilon_N" + std::to_string(n) + ".dat"), "epsilon mean_p min_p max_p", rows);
  }
  write_table(dir / "estimates.dat",
              "epsilon r_hat_s lo hi r_hat_g lo hi r_hat_s_prime lo hi true_risk lo hi", est);
  write_table(dir / "density.dat",
              "epsilon avg_weight_misclassified lo hi avg_weight_successful_adv lo hi", dens);

  for (std::size_t i = 0; i < summary.rows.size(); ++i) {
    const auto& r = summary.rows[i];
    auto hist_rows = [](const Histogram& h) {
      std::vector<std::vector<double>> rows;
      for (std::size_t b = 0; b < kHistogramBins; ++b) {
        rows.push_back({static_cast<double>(b) / kHistogramBins, static_cast<double>(b + 1) / kHistogramBins,
                        static_cast<double>(h[b])});
      }
      return rows;
    };
    char stem[64];
    std::snprintf(stem, sizeof stem, "histogram_e%03zu", i);
    write_table(dir / (std::string(stem) + ".dat"), "bin_lo bin_hi count  (epsilon " + fmt12(r.epsilon) + ")",
                hist_rows(r.histogram));
    for (const auto& c : r.n_model) {
      if (c.n == 1) continue;
      write_table(dir / (std::string(stem) + "_N" + std::to_string(c.n) + ".dat"),
                  "bin_lo bin_hi count  (epsilon " + fmt12(r.epsilon) + ", N " + std::to_string(c.n) + ")",
                  hist_rows(c.histogram));
    }
  }
}

bool UniverseCheck::pass() const {
  if (variants.empty()) return false;
  return std::all_of(variants.begin(), variants.end(), [](const VariantCheck& v) { return v.pass; });
}

UniverseCheck check_universe(const translational::UniverseFixture& fixture, std::uint64_t seed) {
  using namespace translational;
  if (!fixture.classifier) throw Error(ErrorKind::InvalidParameter, "fixture has no classifier");
  if (fixture.bases.empty()) throw Error(ErrorKind::EmptySample, "fixture has no images");
  const int pad = fixture.bases.front().pad();
  const int radius = pad - fixture.epsilon;
  const Universe universe = make_orbit_universe(fixture.bases, radius);

  UniverseCheck out;
  out.name = fixture.name;
  out.universe_size = universe.images.size();
  out.epsilon = fixture.epsilon;

  // Density weights of adversarial copies need translations up to 3 epsilon.
  std::vector<Example> interior;
  for (const auto& img : universe.images) {
    if (img.offset().max_norm() + 3 * fixture.epsilon <= pad) interior.push_back({img, img.label()});
  }
  const std::span<const Example> s(interior);
  const GroundTruth<SourceImage> truth = [](const SourceImage& x) { return x.label(); };
  const InputEquals<SourceImage> equal = [](const SourceImage& a, const SourceImage& b) { return a.same_view(b); };

  for (Variant v : {Variant::Strongest, Variant::Nearest, Variant::Random, Variant::Random2}) {
    const TranslationalConfig cfg{v, fixture.epsilon, seed};
    const TranslationalAeg aeg(fixture.classifier, cfg);
    const Classifier<SourceImage>& f = *fixture.classifier;
    VariantCheck check;
    check.variant = v;

    const auto table = brute_force_pushforward(universe, f, cfg);
    check.entries = table.size();
    for (const auto& e : table) {
      const double w = aeg.density_weight(universe.images[e.index]);
      check.max_abs_diff = std::max(check.max_abs_diff, std::abs(w - e.ratio));
    }

    const double upper = range_bound(cfg) - 1.0;
    bool in_range = true;
    bool weights_ok = true;
    std::size_t adv_errors = 0;
    check.t_min = std::numeric_limits<double>::infinity();
    check.t_max = -std::numeric_limits<double>::infinity();
    for (const auto& ex : interior) {
      const AdversarialOutcome o = evaluate_adversarial<SourceImage>(f, aeg, ex);
      const double t = o.paired().t_value;
      check.t_min = std::min(check.t_min, t);
      check.t_max = std::max(check.t_max, t);
      in_range = in_range && t >= -1.0 && t <= upper;
      adv_errors += o.adv_loss == 1.0 ? 1 : 0;
      if (o.original_loss == 0.0 && o.adv_loss == 1.0) {
        ++check.successful;
        check.max_weight_successful = std::max(check.max_weight_successful, o.weight);
        if (is_deterministic(v)) weights_ok = weights_ok && o.weight <= 0.5;
      }
    }
    check.examples = interior.size();
    check.unweighted_adv_error = interior.empty() ? 0.0 : static_cast<double>(adv_errors) / interior.size();

    const ViolationReport audit = verify_aeg_conditions<SourceImage>(f, truth, aeg, s, equal);
    check.g1_violations = audit.count(Condition::G1);
    check.g2_violations = audit.count(Condition::G2);

    check.pass = check.entries > 0 && check.max_abs_diff <= kOracleTolerance && in_range && weights_ok &&
                 audit.ok();
    out.variants.push_back(check);
  }
  return out;
}

std::vector<fs::path> expand_universe_paths(std::span<const fs::path> paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw Error(ErrorKind::Io, "universe path " + p.string() + " does not exist");
    }
  }
  return out;
}

void emit_oracle_csv(std::span<const UniverseCheck> checks, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "universe,size,epsilon,variant,entries,max_abs_diff,examples,successful,max_weight_successful,t_min,t_max,"
         "unweighted_adv_error,g1_violations,g2_violations,pass\n";
  for (const auto& u : checks) {
    for (const auto& v : u.variants) {
      out << u.name << ',' << u.universe_size << ',' << u.epsilon << ',' << translational::to_string(v.variant) << ','
          << v.entries << ',' << fmt12(v.max_abs_diff) << ',' << v.examples << ',' << v.successful << ','
          << fmt12(v.max_weight_successful) << ',' << fmt12(v.t_min) << ',' << fmt12(v.t_max) << ','
          << fmt12(v.unweighted_adv_error) << ',' << v.g1_violations << ',' << v.g2_violations << ','
          << (v.pass ? 1 : 0) << '\n';
    }
  }
  finish(out, path);
}

}  // namespace ovfit
