#pragma once

// Operator specifications, truncation to the first N basis directions,
// scale weights, the built-in operator registry and run configuration.

#include <specint/common.hpp>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace specint {

/// A symmetric operator presented through its action on the canonical
/// orthonormal basis e_1, e_2, ... (stored 0-based).
template <FieldScalar S>
struct OperatorSpec {
  /// A e_j = d(j) e_j.
  struct Diagonal {
    std::function<double(Index)> entry;
    std::optional<Index> size;
  };
  /// A e_j = b(j-1) e_{j-1} + a(j) e_j + b(j) e_{j+1}; b(j) couples j and j+1.
  struct Jacobi {
    std::function<double(Index)> diag;
    std::function<double(Index)> offdiag;
    std::optional<Index> size;
  };
  /// entry(i, j) = <A e_j, e_i>, zero for |i - j| > bandwidth.
  struct Banded {
    Index bandwidth = 0;
    std::function<S(Index, Index)> entry;
    std::optional<Index> size;
  };
  struct Dense {
    Matrix<S> matrix;
  };
  /// action(j, len) returns the first len coefficients of A e_j. halo is the
  /// number of coefficients past N used when measuring graph leakage.
  struct Callable {
    std::function<Vector<S>(Index, Index)> action;
    std::optional<Index> size;
    Index halo = 0;
  };

  using Kind = std::variant<Diagonal, Jacobi, Banded, Dense, Callable>;

  std::string name;
  Kind kind;
  /// Documented assumption about the basis (density of the graph span).
  std::string assumption;

  static constexpr ScalarField field = field_of<S>();

  std::optional<Index> size() const {
    return std::visit(
        [](const auto& k) -> std::optional<Index> {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Dense>) {
            return k.matrix.rows();
          } else {
            return k.size;
          }
        },
        kind);
  }

  /// Number of coefficients past row N that A e_j (j < N) can touch.
  Index halo(Index n) const {
    return std::visit(
        [n](const auto& k) -> Index {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Diagonal>) {
            return 0;
          } else if constexpr (std::is_same_v<K, Jacobi>) {
            return 1;
          } else if constexpr (std::is_same_v<K, Banded>) {
            return k.bandwidth;
          } else if constexpr (std::is_same_v<K, Dense>) {
            return k.matrix.rows() - n;
          } else {
            return k.halo;
          }
        },
        kind);
  }

  /// First `length` coefficients of A e_j.
  Vector<S> column(Index j, Index length) const {
    Vector<S> out = Vector<S>::Zero(length);
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Diagonal>) {
            if (j < length) out(j) = S(k.entry(j));
          } else if constexpr (std::is_same_v<K, Jacobi>) {
            if (j < length) out(j) = S(k.diag(j));
            if (j > 0 && j - 1 < length) out(j - 1) = S(k.offdiag(j - 1));
            if (j + 1 < length && (!k.size || j + 1 < *k.size)) out(j + 1) = S(k.offdiag(j));
          } else if constexpr (std::is_same_v<K, Banded>) {
            const Index lo = std::max<Index>(0, j - k.bandwidth);
            Index hi = std::min<Index>(length - 1, j + k.bandwidth);
            if (k.size) hi = std::min<Index>(hi, *k.size - 1);
            for (Index i = lo; i <= hi; ++i) out(i) = k.entry(i, j);
          } else if constexpr (std::is_same_v<K, Dense>) {
            const Index rows = std::min<Index>(length, k.matrix.rows());
            out.head(rows) = k.matrix.col(j).head(rows);
          } else {
            Vector<S> col = k.action(j, length);
            if (col.size() != length) {
              throw DimensionError("callable operator '" + name + "' returned " +
                                   std::to_string(col.size()) + " coefficients, expected " +
                                   std::to_string(length));
            }
            out = std::move(col);
          }
        },
        kind);
    return out;
  }
};

inline double symmetry_tolerance(double max_entry) { return 1e-12 * (1.0 + max_entry); }

/// Result of truncation: the symmetrised block and the measured asymmetry.
template <FieldScalar S>
struct Truncation {
  Matrix<S> matrix;
  double asymmetry = 0.0;
};

/// The N x N block <A e_j, e_i>, symmetrised as (B + B*)/2. Throws
/// AsymmetryError when max|B - B*| exceeds 1e-12 (1 + max|B|).
template <FieldScalar S>
Truncation<S> truncate(const OperatorSpec<S>& spec, Index n) {
  if (n < 2) {
    throw DimensionError("truncation dimension must be >= 2, got " + std::to_string(n));
  }
  if (auto size = spec.size(); size && n > *size) {
    throw DimensionError("operator '" + spec.name + "' has size " + std::to_string(*size) +
                         ", cannot truncate to N = " + std::to_string(n));
  }
  Matrix<S> block(n, n);
  for (Index j = 0; j < n; ++j) block.col(j) = spec.column(j, n);

  const Matrix<S> adjoint = block.adjoint();
  const double asymmetry = max_abs(block - adjoint);
  const double tol = symmetry_tolerance(max_abs(block));
  if (asymmetry > tol) {
    std::ostringstream msg;
    msg << "operator '" << spec.name << "' is not symmetric at N = " << n
        << ": max|B - B*| = " << asymmetry << " > " << tol;
    throw AsymmetryError(msg.str(), asymmetry);
  }
  Truncation<S> out;
  out.matrix = (block + adjoint) * 0.5;
  out.asymmetry = asymmetry;
  return out;
}

/// Largest N for which every weight 2^-j / (1 - 2^-N) is a normal double.
inline constexpr Index kMaxWeightDimension = 1022;

/// c_j = 2^-j / (1 - 2^-N), j = 1..N.
inline std::vector<double> scale_weights(Index n) {
  if (n < 1 || n > kMaxWeightDimension) {
    throw DimensionError("scale_weights: N must lie in [1, " +
                         std::to_string(kMaxWeightDimension) + "], got " + std::to_string(n));
  }
  const double norm = 1.0 - std::ldexp(1.0, -static_cast<int>(n));
  std::vector<double> c(static_cast<std::size_t>(n));
  for (Index j = 1; j <= n; ++j) c[j - 1] = std::ldexp(1.0, -static_cast<int>(j)) / norm;
  return c;
}

/// Positivity and unit total, the checkable scale properties at finite N.
inline void validate_weights(const std::vector<double>& w, Index n) {
  if (static_cast<Index>(w.size()) != n) {
    throw ValidationError("expected " + std::to_string(n) + " weights, got " +
                          std::to_string(w.size()));
  }
  double total = 0.0;
  for (double c : w) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ValidationError("weights must be strictly positive and finite");
    }
    total += c;
  }
  if (std::abs(total - 1.0) > 1e-14) {
    std::ostringstream msg;
    msg << "weights must sum to 1 (got " << total << ")";
    throw ValidationError(msg.str());
  }
}

// ---------------------------------------------------------------------------
// Registry

struct RegistryEntry {
  std::string name;
  std::string parameters;
  std::string assumption;
};

inline std::vector<RegistryEntry> builtin_registry() {
  return {
      {"diag3", "(none)",
       "diagonal with entries 1,2,3 repeating; canonical basis is an eigenbasis, so the graph "
       "span is dense"},
      {"discrete_laplacian", "(none)",
       "Dirichlet half-line Laplacian, Jacobi a_j = 2, b_j = -1; bounded, so the canonical "
       "basis spans a dense subset of the graph"},
      {"free_jacobi", "a (default 0), b (default 1)",
       "constant Jacobi matrix a_j = a, b_j = b; bounded, canonical basis dense in the graph"},
      {"harmonic_oscillator", "omega (default 2)",
       "-d^2/dx^2 + x^2 in the Hermite basis of frequency omega (pentadiagonal); finite "
       "combinations of Hermite functions form a core, spectrum 2j-1"},
  };
}

namespace detail {

inline double param_or(const nlohmann::json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_number()) {
    throw ValidationError(std::string("operator parameter '") + key + "' must be a number");
  }
  return params.at(key).get<double>();
}

inline void reject_unknown_params(const nlohmann::json& params, std::string_view op,
                                  std::initializer_list<std::string_view> allowed) {
  if (params.is_null()) return;
  if (!params.is_object()) throw ValidationError("operator.params must be an object");
  for (const auto& [key, value] : params.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown parameter '" + key + "' for operator '" + std::string(op) +
                            "'");
    }
  }
}

}  // namespace detail

/// Reads a dense operator file: '#' comments, then M, then M rows of M
/// entries (real field) or M (re im) pairs (complex field).
template <FieldScalar S>
Matrix<S> load_dense_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dense operator file '" + path.string() + "'");
  std::stringstream body;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    body << line << '\n';
  }
  long long m = 0;
  if (!(body >> m) || m < 1) {
    throw ParseError("dense operator file '" + path.string() + "': missing or invalid size");
  }
  Matrix<S> a(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      double re = 0.0;
      double im = 0.0;
      if (!(body >> re)) {
        throw ParseError("dense operator file '" + path.string() + "': truncated data");
      }
      if constexpr (is_complex_v<S>) {
        if (!(body >> im)) {
          throw ParseError("dense operator file '" + path.string() + "': truncated data");
        }
        a(i, j) = Complex(re, im);
      } else {
        a(i, j) = re;
      }
    }
  }
  std::string extra;
  if (body >> extra) {
    throw ParseError("dense operator file '" + path.string() + "': trailing data '" + extra + "'");
  }
  return a;
}

template <FieldScalar S>
OperatorSpec<S> make_dense_operator(std::string name, Matrix<S> matrix) {
  if (matrix.rows() != matrix.cols()) throw DimensionError("dense operator must be square");
  const double asym = max_abs(matrix - matrix.adjoint());
  if (asym > symmetry_tolerance(max_abs(matrix))) {
    throw AsymmetryError("dense operator '" + name + "' is not symmetric", asym);
  }
  OperatorSpec<S> spec;
  spec.name = std::move(name);
  spec.kind = typename OperatorSpec<S>::Dense{std::move(matrix)};
  spec.assumption = "finite-dimensional: the canonical basis spans the whole space";
  return spec;
}

template <FieldScalar S>
OperatorSpec<S> make_diagonal_operator(std::string name, std::vector<double> entries) {
  OperatorSpec<S> spec;
  spec.name = std::move(name);
  const auto size = static_cast<Index>(entries.size());
  spec.kind = typename OperatorSpec<S>::Diagonal{
      [e = std::move(entries)](Index j) { return e[static_cast<std::size_t>(j)]; }, size};
  spec.assumption = "finite diagonal operator";
  return spec;
}

template <FieldScalar S>
OperatorSpec<S> make_jacobi_operator(std::string name, double a, double b) {
  OperatorSpec<S> spec;
  spec.name = std::move(name);
  spec.kind = typename OperatorSpec<S>::Jacobi{[a](Index) { return a; }, [b](Index) { return b; },
                                               std::nullopt};
  return spec;
}

inline constexpr std::string_view kDenseFilePrefix = "dense_file:";

/// Builds a registry operator. `name` is a built-in name or dense_file:<path>.
template <FieldScalar S>
OperatorSpec<S> make_registry_operator(std::string_view name,
                                       const nlohmann::json& params = nlohmann::json::object()) {
  const auto assumption_of = [](std::string_view n) {
    for (const auto& e : builtin_registry()) {
      if (e.name == n) return e.assumption;
    }
    return std::string();
  };

  if (name == "diag3") {
    detail::reject_unknown_params(params, name, {});
    OperatorSpec<S> spec;
    spec.name = "diag3";
    spec.kind = typename OperatorSpec<S>::Diagonal{
        [](Index j) { return static_cast<double>(j % 3 + 1); }, std::nullopt};
    spec.assumption = assumption_of(name);
    return spec;
  }
  if (name == "free_jacobi") {
    detail::reject_unknown_params(params, name, {"a", "b"});
    auto spec = make_jacobi_operator<S>("free_jacobi", detail::param_or(params, "a", 0.0),
                                        detail::param_or(params, "b", 1.0));
    spec.assumption = assumption_of(name);
    return spec;
  }
  if (name == "discrete_laplacian") {
    detail::reject_unknown_params(params, name, {});
    auto spec = make_jacobi_operator<S>("discrete_laplacian", 2.0, -1.0);
    spec.assumption = assumption_of(name);
    return spec;
  }
  if (name == "harmonic_oscillator") {
    detail::reject_unknown_params(params, name, {"omega"});
    const double omega = detail::param_or(params, "omega", 2.0);
    if (!(omega > 0.0)) throw ValidationError("harmonic_oscillator: omega must be positive");
    // p^2 + x^2 with x = (a + a*)/sqrt(2 omega), p = i sqrt(omega/2)(a* - a).
    const double diag_scale = 0.5 * (omega + 1.0 / omega);
    const double skew_scale = 0.5 * (1.0 / omega - omega);
    OperatorSpec<S> spec;
    spec.name = "harmonic_oscillator";
    spec.kind = typename OperatorSpec<S>::Banded{
        2,
        [=](Index i, Index j) -> S {
          if (i == j) return S(diag_scale * static_cast<double>(2 * i + 1));
          if (std::abs(i - j) == 2) {
            const auto n = static_cast<double>(std::min(i, j));
            return S(skew_scale * std::sqrt((n + 1.0) * (n + 2.0)));
          }
          return S(0.0);
        },
        std::nullopt};
    spec.assumption = assumption_of(name);
    return spec;
  }
  if (name.starts_with(kDenseFilePrefix)) {
    detail::reject_unknown_params(params, "dense_file", {});
    const std::filesystem::path path(std::string(name.substr(kDenseFilePrefix.size())));
    return make_dense_operator<S>(std::string(name), load_dense_file<S>(path));
  }
  throw ValidationError("unknown operator '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Configuration

struct Tolerances {
  /// Absolute eigenvalue clustering radius; default max(1e-10, 1e-12 spread).
  std::optional<double> cluster;
  /// Atoms of the spectral measure with mass <= atom are dropped.
  double atom = 1e-14;
  /// Relative PSD tolerance: residuals down to -psd * trace(U) are clamped.
  double psd = 1e-10;
};

struct OperatorRef {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
  ScalarField field = ScalarField::real;
};

struct RunConfig {
  std::vector<OperatorRef> operators;
  std::vector<Index> n_list;
  std::optional<std::vector<double>> user_weights;
  Tolerances tolerances;
  std::filesystem::path output_dir = "specint_out";
  /// Random test vectors per cell.
  Index vectors = 100;
  /// Largest N for which fibers, sections and the PVM suite are built.
  Index fiber_max_n = 256;
};

template <FieldScalar S>
OperatorSpec<S> make_operator(const OperatorRef& ref) {
  return make_registry_operator<S>(ref.kind, ref.params);
}

/// Weights for dimension N under the configuration (user or default).
inline std::vector<double> weights_for(const RunConfig& config, Index n) {
  if (config.user_weights) {
    validate_weights(*config.user_weights, n);
    return *config.user_weights;
  }
  return scale_weights(n);
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::string_view where,
                                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ValidationError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

inline OperatorRef parse_operator(const nlohmann::json& j) {
  reject_unknown_keys(j, "operator", {"kind", "params", "field"});
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ValidationError("operator.kind must be a string");
  }
  OperatorRef ref;
  ref.kind = j.at("kind").get<std::string>();
  if (j.contains("params")) ref.params = j.at("params");
  if (j.contains("field")) {
    const auto f = j.at("field").get<std::string>();
    if (f == "real") {
      ref.field = ScalarField::real;
    } else if (f == "complex") {
      ref.field = ScalarField::complex;
    } else {
      throw ValidationError("operator.field must be 'real' or 'complex'");
    }
  }
  // Build once to validate the name, parameters and (for dense files) content.
  if (ref.field == ScalarField::real) {
    (void)make_operator<double>(ref);
  } else {
    (void)make_operator<Complex>(ref);
  }
  return ref;
}

}  // namespace detail

/// Validates a parsed configuration document.
inline RunConfig parse_config(const nlohmann::json& doc) {
  RunConfig cfg;
  try {
    detail::reject_unknown_keys(doc, "config", {"operator", "run", "output"});
    if (!doc.contains("operator")) throw ValidationError("missing 'operator'");
    const auto& op = doc.at("operator");
    if (op.is_array()) {
      for (const auto& o : op) cfg.operators.push_back(detail::parse_operator(o));
    } else {
      cfg.operators.push_back(detail::parse_operator(op));
    }
    if (cfg.operators.empty()) throw ValidationError("no operators given");

    if (!doc.contains("run")) throw ValidationError("missing 'run'");
    const auto& run = doc.at("run");
    detail::reject_unknown_keys(run, "run",
                                {"N_list", "weights", "tolerances", "vectors", "fiber_max_N"});
    if (!run.contains("N_list") || !run.at("N_list").is_array() || run.at("N_list").empty()) {
      throw ValidationError("run.N_list must be a non-empty array");
    }
    for (const auto& v : run.at("N_list")) {
      if (!v.is_number_integer()) throw ValidationError("run.N_list entries must be integers");
      const auto n = v.get<long long>();
      if (n < 2) throw ValidationError("run.N_list entries must be >= 2, got " + std::to_string(n));
      cfg.n_list.push_back(static_cast<Index>(n));
    }
    if (run.contains("weights")) {
      const auto& w = run.at("weights");
      if (w.is_string()) {
        if (w.get<std::string>() != "default") {
          throw ValidationError("run.weights must be \"default\" or an array of weights");
        }
      } else if (w.is_array()) {
        std::vector<double> weights;
        for (const auto& c : w) {
          if (!c.is_number()) throw ValidationError("run.weights entries must be numbers");
          weights.push_back(c.get<double>());
        }
        for (Index n : cfg.n_list) validate_weights(weights, n);
        cfg.user_weights = std::move(weights);
      } else {
        throw ValidationError("run.weights must be \"default\" or an array of weights");
      }
    }
    if (run.contains("tolerances")) {
      const auto& t = run.at("tolerances");
      detail::reject_unknown_keys(t, "run.tolerances", {"tol_cluster", "tol_atom", "tol_psd"});
      const auto positive = [&](const char* key) {
        const double v = t.at(key).get<double>();
        if (!(v >= 0.0)) throw ValidationError(std::string(key) + " must be nonnegative");
        return v;
      };
      if (t.contains("tol_cluster")) cfg.tolerances.cluster = positive("tol_cluster");
      if (t.contains("tol_atom")) cfg.tolerances.atom = positive("tol_atom");
      if (t.contains("tol_psd")) cfg.tolerances.psd = positive("tol_psd");
    }
    if (run.contains("vectors")) {
      cfg.vectors = run.at("vectors").get<Index>();
      if (cfg.vectors < 1) throw ValidationError("run.vectors must be >= 1");
    }
    if (run.contains("fiber_max_N")) cfg.fiber_max_n = run.at("fiber_max_N").get<Index>();

    if (doc.contains("output")) {
      const auto& out = doc.at("output");
      detail::reject_unknown_keys(out, "output", {"dir"});
      if (out.contains("dir")) cfg.output_dir = out.at("dir").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid config value: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed config '" + path.string() + "': " + e.what());
  }
  return parse_config(doc);
}

}  // namespace specint
