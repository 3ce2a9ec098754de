#include "nonstatcov/harness/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nonstatcov/errors.hpp"

namespace nonstatcov::harness {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& experiment_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::Simulate, "simulate"},     {ExperimentKind::Decay, "decay"},
      {ExperimentKind::Invert, "invert"},         {ExperimentKind::Neumann, "neumann"},
      {ExperimentKind::Var, "var"},               {ExperimentKind::Baxter, "baxter"},
      {ExperimentKind::Smoothness, "smoothness"}, {ExperimentKind::Partial, "partial"},
      {ExperimentKind::Coherence, "coherence"},   {ExperimentKind::Physical, "physical"},
      {ExperimentKind::VerifyAll, "verify-all"},
  };
  return names;
}

std::string child(const std::string& pointer, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~')
      escaped += "~0";
    else if (c == '/')
      escaped += "~1";
    else
      escaped += c;
  }
  return pointer + "/" + escaped;
}

std::string child(const std::string& pointer, std::size_t index) {
  return pointer + "/" + std::to_string(index);
}

const Json& field(const Json& obj, const std::string& pointer, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(child(pointer, key), "required field is missing");
  return obj.at(key);
}

void require_object(const Json& j, const std::string& pointer) {
  if (!j.is_object()) throw ConfigError(pointer, "expected an object");
}

void reject_unknown(const Json& obj, const std::string& pointer,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) known = known || it.key() == a;
    if (!known) throw ConfigError(child(pointer, it.key()), "unknown field");
  }
}

double number(const Json& j, const std::string& pointer) {
  if (!j.is_number()) throw ConfigError(pointer, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(pointer, "expected a finite number");
  return v;
}

long integer(const Json& j, const std::string& pointer) {
  if (!j.is_number_integer()) throw ConfigError(pointer, "expected an integer");
  return j.get<long>();
}

std::vector<long> integer_list(const Json& j, const std::string& pointer) {
  if (!j.is_array()) throw ConfigError(pointer, "expected an array of integers");
  std::vector<long> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], child(pointer, i)));
  return out;
}

std::vector<double> number_list(const Json& j, const std::string& pointer) {
  if (!j.is_array()) throw ConfigError(pointer, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], child(pointer, i)));
  return out;
}

Grid parse_grid(const Json& j, const std::string& pointer) {
  require_object(j, pointer);
  reject_unknown(j, pointer,
                 {"N", "d", "J", "M", "window", "u", "omega", "pad", "t_lo", "u0", "max_lag",
                  "terms", "reps", "components"});
  Grid g;
  if (j.contains("N")) g.n = integer_list(j["N"], child(pointer, "N"));
  if (j.contains("d")) g.d = integer_list(j["d"], child(pointer, "d"));
  if (j.contains("J")) g.j = integer_list(j["J"], child(pointer, "J"));
  if (j.contains("M")) g.m = integer_list(j["M"], child(pointer, "M"));
  if (j.contains("window")) g.window = integer_list(j["window"], child(pointer, "window"));
  if (j.contains("u")) g.u = number_list(j["u"], child(pointer, "u"));
  if (j.contains("omega")) g.omega = number_list(j["omega"], child(pointer, "omega"));
  if (j.contains("pad")) g.pad = integer(j["pad"], child(pointer, "pad"));
  if (j.contains("t_lo")) g.t_lo = integer(j["t_lo"], child(pointer, "t_lo"));
  if (j.contains("u0")) g.u0 = number(j["u0"], child(pointer, "u0"));
  if (j.contains("max_lag")) g.max_lag = integer(j["max_lag"], child(pointer, "max_lag"));
  if (j.contains("terms")) g.terms = integer(j["terms"], child(pointer, "terms"));
  if (j.contains("reps")) g.reps = integer(j["reps"], child(pointer, "reps"));
  if (j.contains("components")) {
    const auto c = integer_list(j["components"], child(pointer, "components"));
    if (c.size() != 2) throw ConfigError(child(pointer, "components"), "expected two components");
    g.a = static_cast<int>(c[0]);
    g.b = static_cast<int>(c[1]);
  }

  const auto positive = [&](const std::vector<long>& v, const char* key, long lo) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] < lo)
        throw ConfigError(child(child(pointer, key), i),
                          "must be at least " + std::to_string(lo));
  };
  positive(g.n, "N", 1);
  positive(g.d, "d", 0);
  positive(g.j, "J", 0);
  positive(g.m, "M", 1);
  positive(g.window, "window", 1);
  if (g.pad && *g.pad < 0) throw ConfigError(child(pointer, "pad"), "must be nonnegative");
  if (g.max_lag && *g.max_lag < 0)
    throw ConfigError(child(pointer, "max_lag"), "must be nonnegative");
  if (g.terms < 0) throw ConfigError(child(pointer, "terms"), "must be nonnegative");
  if (g.reps < 100) throw ConfigError(child(pointer, "reps"), "must be at least 100");
  if (g.u0 < 0.0 || g.u0 > 1.0) throw ConfigError(child(pointer, "u0"), "must lie in [0, 1]");
  return g;
}

void check_kind_fields(const ExperimentConfig& c) {
  const auto& g = c.grid;
  const int p = c.model.p;
  const auto need_pair = [&] {
    if (p < 2) throw ConfigError("/model/p", "partial covariances need p >= 2");
    if (g.a < 0 || g.a >= p || g.b < 0 || g.b >= p || g.a == g.b)
      throw ConfigError("/grid/components", "need two distinct components in [0, p)");
  };
  const bool sre = c.model.family == Family::SRE;
  switch (c.kind) {
    case ExperimentKind::Physical:
      break;
    case ExperimentKind::Simulate:
      break;
    case ExperimentKind::Partial:
    case ExperimentKind::Coherence:
      need_pair();
      [[fallthrough]];
    default:
      if (sre && c.kind != ExperimentKind::VerifyAll)
        throw ConfigError("/model/family", "SRE models support only simulate and physical");
  }
  if (c.kind == ExperimentKind::Coherence && g.n.size() == 1)
    throw ConfigError("/grid/N", "coherence needs at least two values of N");
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : experiment_names())
    if (kind == k) return name;
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& s) {
  for (const auto& [kind, name] : experiment_names())
    if (name == s) return kind;
  throw ConfigError("", "unknown experiment '" + s + "'");
}

const std::vector<ExperimentKind>& all_experiments() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> out;
    for (const auto& [kind, name] : experiment_names()) out.push_back(kind);
    return out;
  }();
  return kinds;
}

Matrix parse_matrix(const Json& j, const std::string& pointer) {
  if (j.is_number()) return Matrix::Constant(1, 1, number(j, pointer));
  if (!j.is_array() || j.empty()) throw ConfigError(pointer, "expected a nonempty matrix");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw ConfigError(child(pointer, std::size_t{0}), "expected a nonempty row");
  const std::size_t cols = j[0].size();
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = child(pointer, r);
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(rp, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(j[r][c], child(rp, c));
  }
  return out;
}

CoefficientFn parse_coefficient(const Json& j, const std::string& pointer) {
  require_object(j, pointer);
  const Json& form_json = field(j, pointer, "form");
  if (!form_json.is_string()) throw ConfigError(child(pointer, "form"), "expected a string");
  const std::string form = form_json.get<std::string>();
  const auto mat = [&](const char* key) { return parse_matrix(field(j, pointer, key), child(pointer, key)); };
  const auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? number(j[key], child(pointer, key)) : fallback;
  };
  const auto same_shape = [&](const Matrix& x, const Matrix& y, const char* key) {
    if (x.rows() != y.rows() || x.cols() != y.cols())
      throw ConfigError(child(pointer, key), "shape differs from the other payload matrices");
  };
  if (form == "constant") {
    reject_unknown(j, pointer, {"form", "value"});
    return CoefficientFn::constant(mat("value"));
  }
  if (form == "affine") {
    reject_unknown(j, pointer, {"form", "intercept", "slope", "lo", "hi"});
    Matrix a = mat("intercept"), b = mat("slope");
    same_shape(a, b, "slope");
    const double lo = num("lo", 0.0), hi = num("hi", 1.0);
    if (!(lo < hi)) throw ConfigError(child(pointer, "hi"), "need lo < hi");
    return CoefficientFn::affine(std::move(a), std::move(b), lo, hi);
  }
  if (form == "sinusoidal") {
    reject_unknown(j, pointer, {"form", "base", "amplitude", "frequency", "phase"});
    Matrix a = mat("base"), b = mat("amplitude");
    same_shape(a, b, "amplitude");
    return CoefficientFn::sinusoidal(std::move(a), std::move(b), num("frequency", 1.0),
                                     num("phase", 0.0));
  }
  if (form == "piecewise-linear") {
    reject_unknown(j, pointer, {"form", "knots", "values"});
    const auto knots = number_list(field(j, pointer, "knots"), child(pointer, "knots"));
    const Json& vals = field(j, pointer, "values");
    const std::string vp = child(pointer, "values");
    if (!vals.is_array() || vals.size() != knots.size() || knots.empty())
      throw ConfigError(vp, "expected one matrix per knot");
    std::vector<Matrix> values;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      values.push_back(parse_matrix(vals[i], child(vp, i)));
      if (i > 0) {
        same_shape(values[0], values[i], "values");
        if (!(knots[i] > knots[i - 1]))
          throw ConfigError(child(child(pointer, "knots"), i), "knots must increase");
      }
    }
    return CoefficientFn::piecewise_linear(knots, std::move(values));
  }
  throw ConfigError(child(pointer, "form"), "unknown coefficient form '" + form + "'");
}

ModelSpec parse_model(const Json& j, const std::string& pointer) {
  require_object(j, pointer);
  reject_unknown(j, pointer,
                 {"family", "p", "order", "kappa", "name", "coefficients", "coefficient_sequence",
                  "innovation_variance"});
  ModelSpec m;
  const Json& fam = field(j, pointer, "family");
  if (!fam.is_string()) throw ConfigError(child(pointer, "family"), "expected a string");
  try {
    m.family = family_from_string(fam.get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(child(pointer, "family"), e.what());
  }
  m.p = static_cast<int>(integer(field(j, pointer, "p"), child(pointer, "p")));
  if (m.p < 1) throw ConfigError(child(pointer, "p"), "must be positive");
  if (j.contains("order")) m.order = static_cast<int>(integer(j["order"], child(pointer, "order")));
  if (j.contains("kappa")) {
    m.kappa = number(j["kappa"], child(pointer, "kappa"));
    if (!(*m.kappa > 1.0)) throw ConfigError(child(pointer, "kappa"), "must exceed 1");
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError(child(pointer, "name"), "expected a string");
    m.name = j["name"].get<std::string>();
  }

  if (j.contains("coefficients") == j.contains("coefficient_sequence"))
    throw ConfigError(child(pointer, "coefficients"),
                      "give exactly one of coefficients or coefficient_sequence");
  if (j.contains("coefficients")) {
    const Json& cs = j["coefficients"];
    const std::string cp = child(pointer, "coefficients");
    if (!cs.is_array() || cs.empty()) throw ConfigError(cp, "expected a nonempty array");
    for (std::size_t i = 0; i < cs.size(); ++i)
      m.coefficients.push_back(parse_coefficient(cs[i], child(cp, i)));
  } else {
    // Psi_0 = lead, Psi_j = gu(j)^{-decay} tail for j = 1 .. count.
    const std::string sp = child(pointer, "coefficient_sequence");
    const Json& s = j["coefficient_sequence"];
    require_object(s, sp);
    reject_unknown(s, sp, {"lead", "tail", "decay", "count"});
    const CoefficientFn lead = parse_coefficient(field(s, sp, "lead"), child(sp, "lead"));
    const CoefficientFn tail = parse_coefficient(field(s, sp, "tail"), child(sp, "tail"));
    const double decay = number(field(s, sp, "decay"), child(sp, "decay"));
    const long count = integer(field(s, sp, "count"), child(sp, "count"));
    if (count < 0) throw ConfigError(child(sp, "count"), "must be nonnegative");
    m.coefficients.push_back(lead);
    for (long k = 1; k <= count; ++k) m.coefficients.push_back(tail.scaled(std::pow(gu(k), -decay)));
  }
  if (j.contains("innovation_variance"))
    m.innovation_variance =
        parse_coefficient(j["innovation_variance"], child(pointer, "innovation_variance"));

  for (std::size_t i = 0; i < m.coefficients.size(); ++i) {
    const auto& c = m.coefficients[i];
    const bool scalar = m.family == Family::TvARCH;
    const bool sre_b = m.family == Family::SRE && i == 2;
    const Eigen::Index rows = scalar ? 1 : m.p;
    const Eigen::Index cols = scalar ? 1 : m.p;
    if (c.rows() != rows || (!sre_b && c.cols() != cols) || (sre_b && c.rows() != m.p))
      throw ConfigError(child(child(pointer, j.contains("coefficients") ? "coefficients"
                                                                       : "coefficient_sequence"),
                              i),
                        "coefficient shape does not match p");
  }
  if (m.family == Family::TvVMA && !j.contains("order"))
    m.order = static_cast<int>(m.coefficients.size()) - 1;
  if ((m.family == Family::TvVAR || m.family == Family::TvARCH) && !j.contains("order"))
    m.order = static_cast<int>(m.coefficients.size()) - (m.family == Family::TvARCH ? 1 : 0);
  try {
    validate_model(m);
  } catch (const ModelError& e) {
    throw ConfigError(pointer, e.what());
  } catch (const InputError& e) {
    throw ConfigError(pointer, e.what());
  }
  return m;
}

ExperimentConfig parse_config(const Json& j) {
  require_object(j, "");
  reject_unknown(j, "", {"experiment", "model", "grid", "seed", "output_dir", "description"});
  ExperimentConfig c;
  const Json& e = field(j, "", "experiment");
  if (!e.is_string()) throw ConfigError("/experiment", "expected a string");
  try {
    c.kind = experiment_from_string(e.get<std::string>());
  } catch (const ConfigError& err) {
    throw ConfigError("/experiment", err.what());
  }
  const Json& seed = field(j, "", "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    throw ConfigError("/seed", "expected a nonnegative integer");
  c.seed = seed.get<std::uint64_t>();
  c.model = parse_model(field(j, "", "model"), "/model");
  if (j.contains("grid")) c.grid = parse_grid(j["grid"], "/grid");
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("/output_dir", "expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  check_kind_fields(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string prefix = "builtin:";
  if (path.rfind(prefix, 0) == 0) return parse_config(reference_config(path.substr(prefix.size())).config);
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& err) {
    throw ConfigError("", std::string("malformed JSON: ") + err.what());
  }
  return parse_config(j);
}

Json matrix_to_json(const Matrix& a) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json coefficient_to_json(const CoefficientFn& f) {
  switch (f.form()) {
    case CoefficientFn::Form::Constant:
      return {{"form", "constant"}, {"value", matrix_to_json(f.a())}};
    case CoefficientFn::Form::Affine:
      return {{"form", "affine"},
              {"intercept", matrix_to_json(f.a())},
              {"slope", matrix_to_json(f.b())},
              {"lo", f.lo()},
              {"hi", f.hi()}};
    case CoefficientFn::Form::Sinusoidal:
      return {{"form", "sinusoidal"},
              {"base", matrix_to_json(f.a())},
              {"amplitude", matrix_to_json(f.b())},
              {"frequency", f.frequency()},
              {"phase", f.phase()}};
    case CoefficientFn::Form::PiecewiseLinear: {
      Json values = Json::array();
      for (const auto& v : f.values()) values.push_back(matrix_to_json(v));
      return {{"form", "piecewise-linear"}, {"knots", f.knots()}, {"values", values}};
    }
  }
  return {};
}

Json model_to_json(const ModelSpec& m) {
  Json j = {{"family", to_string(m.family)}, {"p", m.p}, {"order", m.order}};
  if (m.kappa) j["kappa"] = *m.kappa;
  if (!m.name.empty()) j["name"] = m.name;
  Json cs = Json::array();
  for (const auto& c : m.coefficients) cs.push_back(coefficient_to_json(c));
  j["coefficients"] = cs;
  if (m.innovation_variance) j["innovation_variance"] = coefficient_to_json(*m.innovation_variance);
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string model_hash(const ModelSpec& m) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(model_to_json(m).dump())));
  return buf;
}

// --- reference models -------------------------------------------------------------

namespace {

CoefficientFn reference_vma_tail() {
  Matrix s(2, 2);
  s << 0.5, 0.2, 0.1, 0.4;
  return CoefficientFn::sinusoidal(0.9 * s, 0.1 * s, 1.0);
}

}  // namespace

ModelSpec reference_vma() {
  ModelSpec m;
  m.family = Family::TvVMA;
  m.p = 2;
  m.order = 300;
  m.kappa = 4.0;
  m.name = "tv-vma-kappa4";
  m.coefficients.push_back(CoefficientFn::constant(Matrix::Identity(2, 2)));
  const CoefficientFn tail = reference_vma_tail();
  for (int j = 1; j <= m.order; ++j) m.coefficients.push_back(tail.scaled(std::pow(gu(j), -4.0)));
  return m;
}

ModelSpec reference_var3() {
  ModelSpec m;
  m.family = Family::TvVAR;
  m.p = 3;
  m.order = 1;
  m.name = "tv-var1-p3";
  Matrix base(3, 3), amp(3, 3);
  base << 0.4, 0.1, 0.0, 0.1, 0.3, 0.1, 0.0, 0.15, 0.35;
  amp << 0.1, 0.0, 0.0, 0.0, 0.1, 0.1, 0.0, 0.1, 0.1;
  m.coefficients.push_back(CoefficientFn::sinusoidal(base, amp, 1.0));
  m.innovation_variance = CoefficientFn::constant(Matrix::Identity(3, 3));
  return m;
}

ModelSpec reference_ar1(double phi, double sigma2) {
  ModelSpec m;
  m.family = Family::TvVAR;
  m.p = 1;
  m.order = 1;
  m.name = "ar1";
  m.coefficients.push_back(CoefficientFn::constant(Matrix::Constant(1, 1, phi)));
  m.innovation_variance = CoefficientFn::constant(Matrix::Constant(1, 1, sigma2));
  return m;
}

ModelSpec reference_arch() {
  ModelSpec m;
  m.family = Family::TvARCH;
  m.p = 1;
  m.order = 1;
  m.name = "tv-arch1";
  m.coefficients.push_back(CoefficientFn::sinusoidal(Matrix::Constant(1, 1, 1.0),
                                                     Matrix::Constant(1, 1, 0.2), 1.0));
  m.coefficients.push_back(CoefficientFn::sinusoidal(Matrix::Constant(1, 1, 0.3),
                                                     Matrix::Constant(1, 1, 0.1), 1.0));
  return m;
}

ModelSpec reference_sre() {
  ModelSpec m;
  m.family = Family::SRE;
  m.p = 2;
  m.order = 1;
  m.name = "sre";
  Matrix d(2, 2);
  d << 0.35, 0.0, 0.0, 0.3;
  // A0(u) = diag(0.35, 0.3) (0.9 + 0.1 sin 2 pi u), A1 = 0.3 I, B = I.
  m.coefficients.push_back(CoefficientFn::sinusoidal(0.9 * d, 0.1 * d, 1.0));
  m.coefficients.push_back(CoefficientFn::constant(0.3 * Matrix::Identity(2, 2)));
  m.coefficients.push_back(CoefficientFn::constant(Matrix::Identity(2, 2)));
  return m;
}

ModelSpec white_noise(int p) {
  ModelSpec m;
  m.family = Family::TvVMA;
  m.p = p;
  m.order = 0;
  m.name = "white-noise";
  m.coefficients.push_back(CoefficientFn::constant(Matrix::Identity(p, p)));
  return m;
}

const std::vector<ReferenceConfig>& reference_configs() {
  static const std::vector<ReferenceConfig> configs = [] {
    std::vector<ReferenceConfig> out;
    Json vma_model = {
        {"family", "tv-vma"},
        {"p", 2},
        {"kappa", 4.0},
        {"name", "tv-vma-kappa4"},
        {"coefficient_sequence",
         {{"lead", {{"form", "constant"}, {"value", {{1.0, 0.0}, {0.0, 1.0}}}}},
          {"tail", coefficient_to_json(reference_vma_tail())},
          {"decay", 4.0},
          {"count", 300}}}};
    const Json var3 = model_to_json(reference_var3());
    const Json sre = model_to_json(reference_sre());
    const Json arch = model_to_json(reference_arch());
    const Json ar1 = model_to_json(reference_ar1());
    const Json wn = model_to_json(white_noise(2));

    out.push_back({"tv-vma-verify",
                   "kappa = 4 tv-VMA reference; runs every acceptance check",
                   {{"experiment", "verify-all"}, {"seed", 20240601}, {"model", vma_model}}});
    out.push_back({"tv-vma-decay",
                   "inverse decay of the kappa = 4 tv-VMA, window 240 and its centred double",
                   {{"experiment", "decay"},
                    {"seed", 1},
                    {"model", vma_model},
                    {"grid", {{"N", {200}}, {"window", {240, 480}}, {"pad", 60}}}}});
    out.push_back({"tv-vma-baxter",
                   "Baxter gaps of the kappa = 4 tv-VMA for d in {5, 10, 20, 40}",
                   {{"experiment", "baxter"},
                    {"seed", 1},
                    {"model", vma_model},
                    {"grid", {{"N", {200}}, {"d", {5, 10, 20, 40}}, {"J", {160}}, {"u0", 0.5}}}}});
    out.push_back({"tv-vma-smoothness",
                   "stationary-approximation gaps of the kappa = 4 tv-VMA",
                   {{"experiment", "smoothness"},
                    {"seed", 1},
                    {"model", vma_model},
                    {"grid", {{"N", {100, 200, 400}}, {"J", {10}}, {"max_lag", 4}}}}});
    out.push_back({"tv-var-partial",
                   "partial covariance gaps of the p = 3 tv-VAR(1)",
                   {{"experiment", "partial"},
                    {"seed", 1},
                    {"model", var3},
                    {"grid", {{"N", {100, 200, 400}}, {"components", {0, 1}}, {"max_lag", 3}}}}});
    out.push_back({"tv-var-coherence",
                   "partial coherence consistency of the p = 3 tv-VAR(1)",
                   {{"experiment", "coherence"},
                    {"seed", 1},
                    {"model", var3},
                    {"grid", {{"N", {200, 400}}, {"components", {0, 1}}, {"max_lag", 40}}}}});
    out.push_back({"tv-var-var",
                   "VAR(infinity) and finite-order coefficients of the p = 3 tv-VAR(1)",
                   {{"experiment", "var"},
                    {"seed", 1},
                    {"model", var3},
                    {"grid", {{"N", {200}}, {"d", {1, 2, 4}}, {"J", {5}}}}}});
    out.push_back({"tv-var-neumann",
                   "banded Neumann inverse of a p = 3 tv-VAR(1) window",
                   {{"experiment", "neumann"},
                    {"seed", 1},
                    {"model", var3},
                    {"grid", {{"N", {200}}, {"window", {80}}, {"M", {2, 4, 8}}, {"terms", 40}}}}});
    out.push_back({"ar1-invert",
                   "finite-section inverse of an AR(1) covariance window",
                   {{"experiment", "invert"},
                    {"seed", 1},
                    {"model", ar1},
                    {"grid", {{"N", {100}}, {"window", {40}}, {"pad", 50}}}}});
    out.push_back({"tv-arch-smoothness",
                   "innovation-variance gap of the squared tvARCH(1) process",
                   {{"experiment", "smoothness"},
                    {"seed", 1},
                    {"model", arch},
                    {"grid", {{"N", {100, 200, 400}}, {"J", {5}}, {"max_lag", 2}}}}});
    out.push_back({"sre-physical",
                   "physical dependence of the stochastic recurrence",
                   {{"experiment", "physical"},
                    {"seed", 7},
                    {"model", sre},
                    {"grid", {{"N", {200}}, {"J", {1, 2, 3, 4, 5, 6}}, {"reps", 5000}}}}});
    out.push_back({"sre-simulate",
                   "sample path of the stochastic recurrence",
                   {{"experiment", "simulate"},
                    {"seed", 7},
                    {"model", sre},
                    {"grid", {{"N", {200}}, {"window", {200}}}}}});
    out.push_back({"white-noise-decay",
                   "inverse of a white-noise window (diagonal)",
                   {{"experiment", "decay"},
                    {"seed", 1},
                    {"model", wn},
                    {"grid", {{"N", {100}}, {"window", {60}}, {"pad", 10}}}}});
    return out;
  }();
  return configs;
}

const ReferenceConfig& reference_config(const std::string& name) {
  for (const auto& c : reference_configs())
    if (c.name == name) return c;
  throw ConfigError("", "unknown reference config '" + name + "'");
}

}  // namespace nonstatcov::harness
