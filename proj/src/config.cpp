#include <singulax/config.hpp>

#include <algorithm>
#include <fstream>
#include <memory>
#include <random>

#include <json.hpp>

#include <singulax/errors.hpp>

namespace singulax {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& where,
                       const std::string& msg) {
  throw ConfigError(path + ": " + where + ": " + msg);
}

Matrix parse_matrix(const json& j, const std::string& path, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    fail(path, where, "expected a matrix as an array of row arrays");
  }
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      fail(path, where, "row " + std::to_string(i) + " has inconsistent length");
    }
    for (size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) fail(path, where, "matrix entries must be numbers");
      m(static_cast<Index>(i), static_cast<Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const json& j, const std::string& path, const std::string& where) {
  if (!j.is_array()) fail(path, where, "expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path, where, "vector entries must be numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

/// A matrix family is either {"constant": [[..]]} or
/// {"sequence": [[[..]],...], "repeat_last": bool}.
StepMatrixFn parse_family(const json& j, const std::string& path, const std::string& where,
                          Index rows, Index cols) {
  if (j.contains("constant")) {
    Matrix m = parse_matrix(j.at("constant"), path, where + ".constant");
    if (m.rows() != rows || m.cols() != cols) {
      fail(path, where, "expected a " + std::to_string(rows) + "x" + std::to_string(cols) +
                            " matrix");
    }
    return [m](int) { return m; };
  }
  if (j.contains("sequence")) {
    auto seq = std::make_shared<std::vector<Matrix>>();
    const json& arr = j.at("sequence");
    if (!arr.is_array() || arr.empty()) fail(path, where, "sequence must be nonempty");
    for (size_t k = 0; k < arr.size(); ++k) {
      Matrix m = parse_matrix(arr[k], path, where + ".sequence[" + std::to_string(k) + "]");
      if (m.rows() != rows || m.cols() != cols) {
        fail(path, where, "sequence entry " + std::to_string(k) + " has wrong shape");
      }
      seq->push_back(std::move(m));
    }
    const bool repeat = j.value("repeat_last", false);
    const std::string w = where;
    const std::string p = path;
    return [seq, repeat, w, p](int k) -> Matrix {
      if (k < 0 || (static_cast<size_t>(k) >= seq->size() && !repeat)) {
        throw ConfigError(p + ": " + w + ": sequence has " + std::to_string(seq->size()) +
                          " entries but step " + std::to_string(k) + " was requested "
                          "(set repeat_last to extend)");
      }
      const size_t i = std::min<size_t>(static_cast<size_t>(k), seq->size() - 1);
      return (*seq)[i];
    };
  }
  fail(path, where, "expected an object with 'constant' or 'sequence'");
}

DescriptorSystem parse_inline_system(const json& j, const std::string& path) {
  for (const char* key : {"n", "m", "p", "F", "C", "H", "S", "S_seq", "R_seq"}) {
    if (!j.contains(key)) fail(path, "/system", std::string("missing required key '") + key + "'");
  }
  DescriptorSystem sys;
  sys.n = j.at("n").get<Index>();
  sys.m = j.at("m").get<Index>();
  sys.p = j.at("p").get<Index>();
  if (sys.n <= 0 || sys.m <= 0 || sys.p <= 0) fail(path, "/system", "n, m, p must be positive");
  sys.F = parse_family(j.at("F"), path, "/system/F", sys.m, sys.n);
  sys.C = parse_family(j.at("C"), path, "/system/C", sys.m, sys.n);
  sys.H = parse_family(j.at("H"), path, "/system/H", sys.p, sys.n);
  sys.S = parse_matrix(j.at("S"), path, "/system/S");
  sys.Sk = parse_family(j.at("S_seq"), path, "/system/S_seq", sys.m, sys.m);
  sys.Rk = parse_family(j.at("R_seq"), path, "/system/R_seq", sys.p, sys.p);
  if (j.contains("known_input")) {
    const json& ki = j.at("known_input");
    if (ki.contains("constant")) {
      Vector v = parse_vector(ki.at("constant"), path, "/system/known_input.constant");
      if (v.size() != sys.m) fail(path, "/system/known_input", "wrong size");
      sys.known_input = [v](int) { return v; };
    } else if (ki.contains("sequence")) {
      auto seq = std::make_shared<std::vector<Vector>>();
      for (size_t k = 0; k < ki.at("sequence").size(); ++k) {
        Vector v = parse_vector(ki.at("sequence")[k], path, "/system/known_input.sequence");
        if (v.size() != sys.m) fail(path, "/system/known_input", "wrong size");
        seq->push_back(std::move(v));
      }
      const bool repeat = ki.value("repeat_last", false);
      sys.known_input = [seq, repeat](int k) -> Vector {
        if (seq->empty()) return Vector();
        const size_t i = std::min<size_t>(static_cast<size_t>(k), seq->size() - 1);
        if (static_cast<size_t>(k) >= seq->size() && !repeat) {
          throw ConfigError("known_input sequence too short for step " + std::to_string(k));
        }
        return (*seq)[i];
      };
    } else {
      fail(path, "/system/known_input", "expected 'constant' or 'sequence'");
    }
  }
  if (j.contains("prior")) {
    sys.prior = parse_vector(j.at("prior"), path, "/system/prior");
    if (sys.prior.size() != sys.m) fail(path, "/system/prior", "wrong size");
  }
  return sys;
}

std::pair<int, int> line_col(const std::string& text, size_t byte) {
  int line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                      e.what());
  }

  RunConfig cfg;
  if (!j.contains("system")) fail(path, "/", "missing required key 'system'");
  const json& sysj = j.at("system");
  if (sysj.is_string()) {
    const std::string name = sysj.get<std::string>();
    if (name != "paper_example") {
      fail(path, "/system", "unknown builtin '" + name + "' (available: paper_example)");
    }
    cfg.system_name = name;
    cfg.system = paper_example_system();
  } else if (sysj.is_object()) {
    cfg.system_name = "inline";
    cfg.system = parse_inline_system(sysj, path);
  } else {
    fail(path, "/system", "expected a builtin name or an inline system object");
  }

  cfg.steps = j.value("steps", 10);
  if (cfg.steps < 0) fail(path, "/steps", "must be >= 0");
  cfg.tol = j.value("tol", 0.0);
  if (cfg.tol < 0) fail(path, "/tol", "must be >= 0");
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.output = j.value("output", std::string{});

  if (j.contains("directions")) {
    for (size_t i = 0; i < j.at("directions").size(); ++i) {
      Vector d = parse_vector(j.at("directions")[i], path,
                              "/directions[" + std::to_string(i) + "]");
      if (d.size() != cfg.system.n) fail(path, "/directions", "direction size must equal n");
      if (d.norm() == 0.0) fail(path, "/directions", "zero direction");
      cfg.directions.push_back(std::move(d));
    }
  }

  if (j.contains("noise")) {
    const json& nj = j.at("noise");
    cfg.noise.kind = nj.value("kind", cfg.noise.kind);
    if (cfg.noise.kind != "zero" && cfg.noise.kind != "example" && cfg.noise.kind != "uniform") {
      fail(path, "/noise/kind", "expected zero | example | uniform");
    }
    cfg.noise.f_amplitude = nj.value("f_amplitude", cfg.noise.f_amplitude);
    cfg.noise.g_amplitude = nj.value("g_amplitude", cfg.noise.g_amplitude);
    cfg.noise.free_amplitude = nj.value("free_amplitude", cfg.noise.free_amplitude);
    cfg.noise.scale_to_budget = nj.value("scale_to_budget", cfg.noise.scale_to_budget);
    cfg.noise.budget = nj.value("budget", cfg.noise.budget);
  } else if (cfg.system_name == "paper_example") {
    cfg.noise.kind = "example";
    cfg.noise.free_amplitude = 0.5;
  }
  if (cfg.noise.kind == "example" && (cfg.system.m != 2 || cfg.system.p != 4)) {
    fail(path, "/noise/kind", "'example' generators require m = 2, p = 4");
  }

  if (j.contains("x0")) {
    cfg.x0 = parse_vector(j.at("x0"), path, "/x0");
    if (cfg.x0.size() != cfg.system.n) fail(path, "/x0", "size must equal n");
  } else if (cfg.system_name == "paper_example") {
    cfg.x0 = Vector::Zero(3);
    cfg.x0 << 1, 1, 0;
  } else {
    cfg.x0 = Vector::Zero(cfg.system.n);
  }
  return cfg;
}

NoiseRealization make_noise(const RunConfig& cfg, int N) {
  NoiseRealization nr;
  const Index m = cfg.system.m;
  const Index p = cfg.system.p;
  const Index n = cfg.system.n;

  if (cfg.noise.kind == "zero") {
    for (int k = 0; k < N; ++k) nr.f.push_back(Vector::Zero(m));
    for (int k = 0; k <= N; ++k) nr.g.push_back(Vector::Zero(p));
  } else if (cfg.noise.kind == "example") {
    const StepVectorFn fg = example_disturbance(cfg.noise.f_amplitude);
    const StepVectorFn gg = example_noise(cfg.noise.g_amplitude);
    for (int k = 0; k < N; ++k) nr.f.push_back(fg(k));
    for (int k = 0; k <= N; ++k) nr.g.push_back(gg(k));
  } else {  // uniform
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < N; ++k) {
      Vector v(m);
      for (Index i = 0; i < m; ++i) v(i) = cfg.noise.f_amplitude * u(rng);
      nr.f.push_back(v);
    }
    for (int k = 0; k <= N; ++k) {
      Vector v(p);
      for (Index i = 0; i < p; ++i) v(i) = cfg.noise.g_amplitude * u(rng);
      nr.g.push_back(v);
    }
  }

  const StepVectorFn fr = example_free_motion(n, cfg.noise.free_amplitude);
  for (int k = 0; k < N; ++k) {
    nr.free_motion.push_back(cfg.noise.free_amplitude == 0.0 ? Vector(Vector::Zero(n)) : fr(k));
  }

  if (cfg.noise.scale_to_budget && cfg.noise.kind != "zero") {
    // q is fixed by x0, so only the f/g amplitudes can be shrunk.
    const Vector q = cfg.system.F_at(0) * cfg.x0;
    const double vq = q.dot(cfg.system.S_weight() * q);
    double vf = 0.0, vg = 0.0;
    for (size_t k = 0; k < nr.f.size(); ++k) {
      vf += nr.f[k].dot(cfg.system.Sk_at(static_cast<int>(k)) * nr.f[k]);
    }
    for (size_t k = 0; k < nr.g.size(); ++k) {
      vg += nr.g[k].dot(cfg.system.Rk_at(static_cast<int>(k)) * nr.g[k]);
    }
    if (vf + vg > 0 && vq + vf + vg > cfg.noise.budget) {
      const double s = std::sqrt(std::max(0.0, cfg.noise.budget - vq) / (vf + vg));
      for (Vector& v : nr.f) v *= s;
      for (Vector& v : nr.g) v *= s;
    }
  }
  return nr;
}

std::vector<Vector> effective_directions(const RunConfig& cfg) {
  if (!cfg.directions.empty()) return cfg.directions;
  std::vector<Vector> dirs;
  for (Index i = 0; i < cfg.system.n; ++i) {
    Vector e = Vector::Zero(cfg.system.n);
    e(i) = 1.0;
    dirs.push_back(e);
  }
  return dirs;
}

}  // namespace singulax
