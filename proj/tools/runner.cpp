#include "runner.hpp"

#include <specint/specint.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace specint::cli {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInequalitySlack = 1e-12;
constexpr std::array<int, 4> kRampOrders{2, 4, 8, 16};
constexpr int kPvmSetCount = 20;
constexpr int kPvmVectorPairs = 5;

CheckRow to_row(const Check& c, const std::string& op, Index n) {
  return CheckRow{c.name, op, n, c.value, c.bound, c.pass};
}

std::string sanitize(const std::string& label) {
  std::string out;
  for (char ch : label) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
    out.push_back(keep ? ch : '_');
  }
  return out;
}

std::string cell_dir(const std::string& label, Index n) {
  return "cells/" + sanitize(label) + "_N" + std::to_string(n);
}

template <class T>
std::string measure_csv(const AtomicMeasure<T>& m) {
  std::ostringstream os;
  write_measure_csv(os, m);
  return os.str();
}

/// Endpoint for a test interval: a uniform draw in [lo, hi], moved off
/// atoms by at least 1e-8.
double endpoint_off_atoms(SplitMix64& rng, double lo, double hi, const AtomicMeasure<double>& mu) {
  double t = lo + (hi - lo) * rng.uniform();
  for (int guard = 0; guard < 64; ++guard) {
    bool near = false;
    for (const auto& a : mu.atoms()) {
      if (std::abs(a.lambda - t) < 1e-8) near = true;
    }
    if (!near) return t;
    t += 3e-8;
  }
  return t;
}

/// 18 random intervals with mixed endpoint flags, a two-piece union and the
/// whole line.
std::vector<BorelSet> pvm_test_family(SplitMix64& rng, const AtomicMeasure<double>& mu) {
  const double lo = mu.size() == 0 ? -1.0 : mu[0].lambda - 1.0;
  const double hi = mu.size() == 0 ? 1.0 : mu[mu.size() - 1].lambda + 1.0;
  std::vector<BorelSet> sets;
  for (int i = 0; i < kPvmSetCount - 2; ++i) {
    double a = endpoint_off_atoms(rng, lo, hi, mu);
    double b = endpoint_off_atoms(rng, lo, hi, mu);
    if (a > b) std::swap(a, b);
    switch (i % 4) {
      case 0: sets.push_back(BorelSet{Interval::closed(a, b)}); break;
      case 1: sets.push_back(BorelSet{Interval::open(a, b)}); break;
      case 2: sets.push_back(BorelSet{Interval::closed_open(a, b)}); break;
      default: sets.push_back(BorelSet{Interval::open_closed(a, b)}); break;
    }
  }
  std::array<double, 4> cuts{};
  for (double& c : cuts) c = endpoint_off_atoms(rng, lo, hi, mu);
  std::sort(cuts.begin(), cuts.end());
  sets.push_back(BorelSet{Interval::closed(cuts[0], cuts[1]), Interval::closed(cuts[2], cuts[3])});
  sets.push_back(BorelSet::real_line());
  return sets;
}

template <FieldScalar S>
double nu_mass_in(const AtomicMeasure<S>& nu, const BorelSet& b, S& out) {
  out = S(0.0);
  for (const auto& a : nu.atoms()) {
    if (b.contains(a.lambda)) out += a.mass;
  }
  return std::abs(out);
}

template <FieldScalar S>
void run_cell_typed(const RunConfig& config, const OperatorRef& ref, CellResult& cell,
                    std::uint64_t seed) {
  const std::string& op = cell.op;
  const Index n = cell.n;
  auto add = [&](std::string name, double value, double bound) {
    cell.checks.push_back(to_row(make_check(std::move(name), value, bound), op, n));
  };
  auto metric = [&](std::string name, double value) {
    cell.convergence.push_back(ConvergenceRow{op, n, std::move(name), value});
  };
  auto experiment = [&](std::string name, Index m, int k, double value) {
    cell.experiments.push_back(ExperimentRow{std::move(name), op, n, m, k, value});
  };
  const std::string dir = cell_dir(op, n);

  const auto spec = make_operator<S>(ref);
  ModelTolerances tol;
  tol.cluster = config.tolerances.cluster;
  tol.atom = config.tolerances.atom;
  tol.psd = config.tolerances.psd;
  const auto model = build_spectral_model(QuasiSampling<S>::from_spec(spec, n, weights_for(config, n)), tol);
  const auto& mu = model.measure.mu;
  const double a_max = model.matrix_max();
  const double scale = 1.0 + a_max;
  const bool dropped = model.measure.dropped_atoms > 0;

  // sampling / spectral_measure
  add("probability_normalization", std::abs(mu.total() + model.measure.dropped_mass - 1.0), 1e-12);
  add("eigen_reconstruction", eigen_reconstruction_error(model.sampling, model.eigen),
      model.eigen.tol_recon);
  metric("atom_count", static_cast<double>(mu.size()));
  metric("dropped_atoms", static_cast<double>(model.measure.dropped_atoms));
  metric("dropped_mass", model.measure.dropped_mass);

  SplitMix64 rng(seed);
  std::vector<Vector<S>> xs;
  std::vector<Vector<S>> ys;
  for (Index i = 0; i < config.vectors; ++i) {
    xs.push_back(random_unit_vector<S>(rng, n));
    ys.push_back(random_unit_vector<S>(rng, n));
  }

  double moment_worst = 0.0;
  double parseval_worst = 0.0;
  double cs_worst = 0.0;
  double perturbation_worst = 0.0;
  double pvm_moment_worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& x = xs[i];
    const auto& y = ys[i];
    moment_worst = std::max(moment_worst, moment_defect(model, x, 6));
    const auto nu = nu_measure(model, x, y);
    S total = S(0.0);
    for (const auto& a : nu.atoms()) total += a.mass;
    const S expected = inner<S>(model.project_retained(x), model.project_retained(y));
    parseval_worst = std::max(parseval_worst, std::abs(total - expected));
    cs_worst = std::max(cs_worst, -cauchy_schwarz_check(model, x, y).slack());
    const Vector<S> x2 = x + 1e-3 * y;
    const Vector<S> y2 = y - 1e-3 * x;
    perturbation_worst = std::max(perturbation_worst, -perturbation_bound(model, x, x2, y, y2).slack());
    const Vector<S> px = model.project_retained(x);
    for (const auto& pair : moment_identity_check(model, px)) {
      pvm_moment_worst =
          std::max(pvm_moment_worst, std::abs(pair.lhs - pair.rhs) / std::pow(scale, pair.order));
    }
  }
  add("moment_identity_k6", moment_worst, 1e-9);
  add("nu_total_mass", parseval_worst, 1e-12);
  add("cauchy_schwarz", std::max(0.0, cs_worst), kInequalitySlack);
  add("perturbation_bound", std::max(0.0, perturbation_worst), kInequalitySlack);
  add("pvm_moment_identity", pvm_moment_worst, 1e-9);

  double tail_worst = 0.0;
  for (double radius : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    tail_worst = std::max(tail_worst, -tail_mass_check(model, radius).slack());
  }
  add("tail_mass_bound", std::max(0.0, tail_worst), kInequalitySlack);

  const Vector<S> e1 = basis_vector<S>(n, 0);
  const auto nu_e1 = nu_measure(model, e1, e1);
  cell.files.push_back({dir + "/measure.csv", measure_csv(mu)});
  cell.files.push_back({dir + "/nu_e1.csv", measure_csv(nu_e1)});
  const double spread = mu.size() == 0 ? 0.0 : mu[mu.size() - 1].lambda - mu[0].lambda;
  cell.files.push_back({dir + "/histogram.csv", measure_csv(bin_pushforward(mu, std::max(0.05, spread / 64.0)))});

  if (nu_e1.size() > 0) {
    const auto p = to_probability(nu_e1);
    for (const auto& a : p.atoms()) {
      cell.nu_e1_lambda.push_back(a.lambda);
      cell.nu_e1_mass.push_back(a.mass);
    }
    if (ref.kind == "free_jacobi" && detail::param_or(ref.params, "a", 0.0) == 0.0 &&
        detail::param_or(ref.params, "b", 1.0) == 1.0) {
      cell.semicircle_distance = kolmogorov_distance(p, semicircle_cdf);
      metric("ks_semicircle_e1", *cell.semicircle_distance);
    }
  }
  const std::array<double, 1> deltas{0.01};
  metric("s_integrability_e1_delta_0.01", s_integrability_profile<S>(model, e1, e1, deltas)[0]);
  {
    Vector<S> x = Vector<S>::Zero(2);
    x(0) = S(std::sqrt(0.5));
    x(1) = S(std::sqrt(0.5));
    cell.graph_residual = graph_residual(spec, x, n);
    metric("graph_residual_e1_e2", cell.graph_residual);
  }

  if (n > config.fiber_max_n) {
    metric("fibers_skipped_above_fiber_max_N", 1.0);
    return;
  }

  // sections / direct_integral
  const auto gf = gram_field(model);
  auto fibers = build_fibers(gf, tol.psd);
  double gram_worst = 0.0;
  double rank_mismatch = 0.0;
  for (std::size_t a = 0; a < fibers.size(); ++a) {
    const Matrix<S> u = gf.matrix(a);
    gram_worst = std::max(gram_worst, max_abs(fibers[a].gram() - u) / (1.0 + max_abs(u)));
    if (fibers[a].rank != gf.multiplicity(a)) rank_mismatch += 1.0;
  }
  add("gram_reproduction", gram_worst, 1e-9);
  add("fiber_rank_mismatch", rank_mismatch, 0.0);

  const DirectIntegral<S> di(mu, std::move(fibers));
  double isometry_worst = 0.0;
  double polarization_worst = 0.0;
  double intertwining_worst = 0.0;
  double rn_worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& x = xs[i];
    const auto& y = ys[i];
    const Vector<S> px = model.project_retained(x);
    const Vector<S> py = model.project_retained(y);
    const auto ux = apply_U(di, x);
    const auto uy = apply_U(di, y);
    isometry_worst = std::max(isometry_worst, std::abs(norm_mu(di, ux) - px.norm()));
    polarization_worst = std::max(polarization_worst, std::abs(inner_product_mu(di, ux, uy) - inner<S>(px, py)));
    intertwining_worst = std::max(intertwining_worst, intertwining_residual(di, model, x) / scale);
    const auto nu = nu_measure(model, x, y);
    for (std::size_t a = 0; a < di.atom_count(); ++a) {
      const S density = inner<S>(ux.values[a], uy.values[a]) * di.mass(a);
      rn_worst = std::max(rn_worst, std::abs(density - nu[a].mass));
    }
  }
  add("isometry", isometry_worst, 1e-9);
  add("polarization", polarization_worst, 1e-9);
  add("intertwining", intertwining_worst, 1e-9);
  add("radon_nikodym", rn_worst, 1e-9);
  {
    std::ostringstream os;
    write_section_csv(os, di, apply_U(di, e1));
    cell.files.push_back({dir + "/section_e1.csv", os.str()});
  }

  // pvm
  const auto sets = pvm_test_family(rng, mu);
  for (const auto& c : pvm_axiom_report(model, sets)) cell.checks.push_back(to_row(c, op, n));
  double consistency_worst = 0.0;
  double bound_excess = 0.0;
  for (const auto& b : sets) {
    const auto p = spectral_projection(model, b);
    for (int i = 0; i < kPvmVectorPairs && i < static_cast<int>(xs.size()); ++i) {
      const auto& x = xs[i];
      const auto& y = ys[i];
      const S lhs = inner<S>(Vector<S>(p.matrix * x), y);
      S rhs;
      nu_mass_in(nu_measure(model, x, y), b, rhs);
      consistency_worst = std::max(consistency_worst, std::abs(lhs - rhs));
      bound_excess = std::max(bound_excess, std::abs(lhs) - x.norm() * y.norm());
    }
  }
  add("pvm_nu_consistency", consistency_worst, 1e-10);
  add("pvm_contraction", std::max(0.0, bound_excess), kInequalitySlack);
  const Matrix<S> whole = spectral_projection(model, BorelSet::real_line()).matrix;
  const Matrix<S> unit = dropped ? model.retained_projector() : Matrix<S>(Matrix<S>::Identity(n, n));
  add("pvm_unit", max_abs(whole - unit), 1e-10);
  add("pvm_reconstruction", reconstruction_residual(model), 1e-9 * scale);
  {
    const Polynomial phi({1.0, -0.5, 0.25});
    const Polynomial psi({0.0, 1.0, 0.0, -0.125});
    const Matrix<S> prod = functional_calculus(model, phi) * functional_calculus(model, psi);
    const Matrix<S> joint = functional_calculus(model, phi * psi);
    add("functional_calculus_multiplicative", max_abs(prod - joint) / std::max(1.0, max_abs(joint)), 1e-9);
  }

  // selfadjoint_probe: with dropped atoms the sections no longer span every
  // U(e_j) independently, so the range machinery is skipped.
  if (dropped) {
    metric("probes_skipped_dropped_atoms", static_cast<double>(model.measure.dropped_atoms));
    return;
  }
  double max_abs_lambda = 0.0;
  for (const auto& a : mu.atoms()) max_abs_lambda = std::max(max_abs_lambda, std::abs(a.lambda));
  const double radius = std::min(max_abs_lambda, 8.0) + 0.5;
  const double lo = -0.5 * radius;
  const double hi = 0.5 * radius;
  const auto x_section = apply_U(di, xs.front());
  const std::vector<int> k_list(kRampOrders.begin(), kRampOrders.end());

  const auto full = range_indicator_experiment(di, n, lo, hi, radius, k_list, x_section);
  double excess = 0.0;
  for (const auto& row : full.rows) {
    excess = std::max(excess, row.distance - row.bound());
    experiment("range_indicator", n, row.k, row.distance);
    experiment("range_indicator_bound", n, row.k, row.bound());
  }
  add("range_indicator_full_frame", std::max(0.0, excess), 1e-10);

  const Index m_sub = std::max<Index>(1, n / 4);
  Vector<S> sub_x = xs.front();
  sub_x.tail(n - m_sub).setZero();
  const auto sub_section = apply_U(di, Vector<S>(sub_x.normalized()));
  const auto sub = range_indicator_experiment(di, m_sub, lo, hi, radius, k_list, sub_section);
  for (const auto& row : sub.rows) experiment("range_indicator", m_sub, row.k, row.distance);

  double tk_excess = 0.0;
  for (const auto& row : tk_commutation_check(di, n, x_section, 3, radius)) {
    tk_excess = std::max(tk_excess, row.defect - row.bound);
    experiment("tk_commutation", n, row.k, row.defect);
  }
  add("tk_commutation_full_frame", std::max(0.0, tk_excess), 0.0);
  for (const auto& row : tk_commutation_check(di, m_sub, sub_section, 3, radius)) {
    experiment("tk_commutation", m_sub, row.k, row.defect);
  }
}

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << body;
}

}  // namespace

bool Report::success() const {
  for (const auto& cell : cells) {
    if (cell.error) return false;
    for (const auto& c : cell.checks) {
      if (!c.pass) return false;
    }
  }
  return std::all_of(cross_checks.begin(), cross_checks.end(), [](const CheckRow& c) { return c.pass; });
}

std::uint64_t seed_from_environment() {
  const char* raw = std::getenv("SPECINT_SEED");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 0);
  if (end == raw || *end != '\0') throw ValidationError(std::string("SPECINT_SEED is not an integer: ") + raw);
  return v;
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& label, Index n) {
  // FNV-1a over the label, then one SplitMix64 step over the combination.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  SplitMix64 mix(seed ^ h ^ (static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ULL));
  return mix.next();
}

std::vector<std::string> operator_labels(const RunConfig& config) {
  std::vector<std::string> labels;
  for (const auto& ref : config.operators) {
    labels.push_back(ref.field == ScalarField::complex ? ref.kind + "[complex]" : ref.kind);
  }
  std::map<std::string, int> seen;
  for (const auto& l : labels) ++seen[l];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (seen[labels[i]] > 1) labels[i] += "#" + std::to_string(i + 1);
  }
  return labels;
}

CellResult run_cell(const RunConfig& config, const OperatorRef& ref, const std::string& label,
                    Index n, std::uint64_t seed) {
  CellResult cell;
  cell.op = label;
  cell.field = to_string(ref.field);
  cell.n = n;
  const auto start = Clock::now();
  try {
    if (ref.field == ScalarField::complex) {
      run_cell_typed<Complex>(config, ref, cell, seed);
    } else {
      run_cell_typed<double>(config, ref, cell, seed);
    }
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  cell.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return cell;
}

std::string checks_csv(const std::vector<CheckRow>& rows) {
  std::string out = "check_name,operator,N,value,bound,pass\n";
  for (const auto& r : rows) {
    out += r.name + ',' + r.op + ',' + std::to_string(r.n) + ',' + format_number(r.value) + ',' +
           format_number(r.bound) + ',' + (r.pass ? "true" : "false") + '\n';
  }
  return out;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "operator,N,metric,value\n";
  for (const auto& r : rows) {
    out += r.op + ',' + std::to_string(r.n) + ',' + r.metric + ',' + format_number(r.value) + '\n';
  }
  return out;
}

std::string experiments_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "experiment,operator,N,m,k,value\n";
  for (const auto& r : rows) {
    out += r.experiment + ',' + r.op + ',' + std::to_string(r.n) + ',' + std::to_string(r.m) + ',' +
           std::to_string(r.k) + ',' + format_number(r.value) + '\n';
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

Report run(const RunConfig& config, const RunOptions& options,
           const std::optional<nlohmann::json>& raw_config) {
  const auto start = Clock::now();
  const std::string started = now_utc();
  Report report;
  report.out_dir = options.out_dir.value_or(config.output_dir);

  struct Task {
    std::size_t op;
    std::string label;
    Index n;
  };
  const auto labels = operator_labels(config);
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < config.operators.size(); ++i) {
    for (Index n : config.n_list) tasks.push_back({i, labels[i], n});
  }
  std::stable_sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    if (a.label != b.label) return a.label < b.label;
    return a.n < b.n;
  });

  report.cells.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& t = tasks[i];
      report.cells[i] = run_cell(config, config.operators[t.op], t.label, t.n,
                                 cell_seed(options.seed, t.label, t.n));
      if (report.cells[i].error) {
        std::lock_guard lock(log_mutex);
        std::cerr << "specint: cell " << t.label << " N=" << t.n << " failed: " << *report.cells[i].error
                  << '\n';
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Cross-N diagnostics per operator, cells already ordered by (label, N).
  std::map<std::string, std::vector<const CellResult*>> by_op;
  for (const auto& cell : report.cells) {
    if (!cell.error) by_op[cell.op].push_back(&cell);
  }
  for (const auto& [op, cells] : by_op) {
    if (cells.size() < 2) continue;
    double graph_increase = 0.0;
    std::optional<double> semicircle_increase;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const auto* prev = cells[i - 1];
      const auto* cur = cells[i];
      graph_increase = std::max(graph_increase, cur->graph_residual - prev->graph_residual);
      if (!prev->nu_e1_lambda.empty() && !cur->nu_e1_lambda.empty()) {
        auto to_measure = [](const CellResult* c) {
          std::vector<Atom<double>> atoms;
          for (std::size_t a = 0; a < c->nu_e1_lambda.size(); ++a) atoms.push_back({c->nu_e1_lambda[a], c->nu_e1_mass[a]});
          return AtomicMeasure<double>(std::move(atoms), MeasureKind::probability);
        };
        report.cross_convergence.push_back({op, cur->n, "HEURISTIC:ks_successive_e1",
                                            kolmogorov_distance(to_measure(prev), to_measure(cur))});
      }
      if (prev->semicircle_distance && cur->semicircle_distance) {
        const double d = *cur->semicircle_distance - *prev->semicircle_distance;
        semicircle_increase = semicircle_increase ? std::max(*semicircle_increase, d) : d;
      }
    }
    const Index last = cells.back()->n;
    report.cross_checks.push_back(to_row(make_check("graph_residual_monotone", std::max(0.0, graph_increase), 1e-12), op, last));
    if (semicircle_increase) {
      CheckRow row{"ks_semicircle_strictly_decreasing", op, last, *semicircle_increase, 0.0, *semicircle_increase < 0.0};
      report.cross_checks.push_back(row);
    }
  }

  std::vector<CheckRow> checks;
  std::vector<ConvergenceRow> convergence;
  std::vector<ExperimentRow> experiments;
  for (const auto& cell : report.cells) {
    checks.insert(checks.end(), cell.checks.begin(), cell.checks.end());
    convergence.insert(convergence.end(), cell.convergence.begin(), cell.convergence.end());
    experiments.insert(experiments.end(), cell.experiments.begin(), cell.experiments.end());
    for (const auto& f : cell.files) report.files.push_back(f);
  }
  checks.insert(checks.end(), report.cross_checks.begin(), report.cross_checks.end());
  convergence.insert(convergence.end(), report.cross_convergence.begin(), report.cross_convergence.end());
  report.files.push_back({"checks.csv", checks_csv(checks)});
  report.files.push_back({"convergence.csv", convergence_csv(convergence)});
  report.files.push_back({"experiments.csv", experiments_csv(experiments)});
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  if (!options.write_files) return report;

  nlohmann::json manifest;
  manifest["tool"] = "specint";
  manifest["started_utc"] = started;
  manifest["finished_utc"] = now_utc();
  manifest["wall_seconds"] = report.wall_seconds;
  manifest["seed"] = options.seed;
  manifest["jobs"] = jobs;
  manifest["success"] = report.success();
  if (raw_config) manifest["config"] = *raw_config;
  manifest["weights"] = config.user_weights ? "user" : "default";
  manifest["tolerances"] = {{"tol_cluster", config.tolerances.cluster ? nlohmann::json(*config.tolerances.cluster)
                                                                      : nlohmann::json("default")},
                            {"tol_atom", config.tolerances.atom},
                            {"tol_psd", config.tolerances.psd}};
  manifest["cells"] = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json c{{"operator", cell.op}, {"field", cell.field}, {"N", cell.n}, {"wall_seconds", cell.wall_seconds}};
    c["status"] = cell.error ? "error" : "ok";
    if (cell.error) c["error"] = *cell.error;
    manifest["cells"].push_back(std::move(c));
  }
  manifest["files"] = nlohmann::json::array();
  for (const auto& f : report.files) {
    write_file(report.out_dir / f.path, f.body);
    manifest["files"].push_back({{"path", f.path}, {"bytes", f.body.size()}, {"sha256", sha256_hex(f.body)}});
  }
  write_file(report.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

}  // namespace specint::cli
