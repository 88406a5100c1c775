#pragma once

// Batch experiments driven by a single JSON config. Each subcommand is a
// pure function from a parsed config to a set of output files, so reruns
// with the same config produce the same bytes.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "json.hpp"
#include "levy.hpp"
#include "path_io.hpp"
#include "paths.hpp"
#include "ratefn.hpp"
#include "sde.hpp"
#include "vector_field.hpp"

namespace ldplab::experiment {

/// Malformed or invalid config; the message starts with file:line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical method failed mid-run; `trace` is written next to the outputs.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, Json trace) : std::runtime_error(what), trace_(std::move(trace)) {}
  const Json& trace() const noexcept { return trace_; }

 private:
  Json trace_;
};

// ---------------------------------------------------------------------------
// Source text with a JSON-pointer -> line map

namespace detail {

inline std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

/// Walks text that nlohmann has already accepted and records the line where
/// each value (or its key) starts.
class LineIndexer {
 public:
  explicit LineIndexer(const std::string& s) : s_(s) {}

  std::map<std::string, int> run() {
    skip();
    value("");
    return lines_;
  }

 private:
  void skip() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string_token() {
    std::string raw;
    ++i_;  // opening quote
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') {
        const char e = s_[i_ + 1];
        raw += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        i_ += e == 'u' ? 6 : 2;
        continue;
      }
      raw += s_[i_++];
    }
    ++i_;
    return raw;
  }

  void value(const std::string& ptr) {
    lines_.emplace(ptr, line_);
    const char c = s_[i_];
    if (c == '{') {
      ++i_;
      skip();
      while (s_[i_] != '}') {
        const int key_line = line_;
        const std::string key = string_token();
        skip();
        ++i_;  // colon
        skip();
        const std::string child = ptr + "/" + escape_token(key);
        lines_.emplace(child, key_line);
        value(child);
        skip();
        if (s_[i_] == ',') ++i_;
        skip();
      }
      ++i_;
    } else if (c == '[') {
      ++i_;
      skip();
      std::size_t k = 0;
      while (s_[i_] != ']') {
        value(ptr + "/" + std::to_string(k++));
        skip();
        if (s_[i_] == ',') ++i_;
        skip();
      }
      ++i_;
    } else if (c == '"') {
      string_token();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' && s_[i_] != ' ' && s_[i_] != '\n' &&
             s_[i_] != '\r' && s_[i_] != '\t')
        ++i_;
    }
  }

  const std::string& s_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

}  // namespace detail

class ConfigSource {
 public:
  ConfigSource(std::string name, std::string text) : name_(std::move(name)), text_(std::move(text)) {
    try {
      root_ = Json::parse(text_);
    } catch (const Json::parse_error& e) {
      int line = 1, col = 1;
      for (std::size_t k = 0; k + 1 < e.byte && k < text_.size(); ++k) {
        if (text_[k] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      std::string msg = e.what();
      if (const auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
      throw ConfigError(name_ + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
    }
    if (!root_.is_object()) throw ConfigError(name_ + ":1: config must be a JSON object");
    lines_ = detail::LineIndexer(text_).run();
    resolved_ = root_;
  }

  static ConfigSource from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ":0: cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return ConfigSource(path, ss.str());
  }

  const Json& root() const noexcept { return root_; }
  const std::string& name() const noexcept { return name_; }

  /// Line of the nearest enclosing value that exists in the text.
  int line_of(std::string ptr) const {
    while (true) {
      if (auto it = lines_.find(ptr); it != lines_.end()) return it->second;
      if (ptr.empty()) return 1;
      ptr = ptr.substr(0, ptr.rfind('/'));
    }
  }

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw ConfigError(name_ + ":" + std::to_string(line_of(ptr)) + ": " + (ptr.empty() ? "/" : ptr) + ": " + msg);
  }

  /// Records a default that was filled in, so outputs carry the resolved config.
  void resolve(const std::string& ptr, const Json& v) const { resolved_[Json::json_pointer(ptr)] = v; }

  /// Resolved config without run-placement keys (output_dir, workers); those
  /// never change results and are left out so outputs compare byte-equal.
  Json resolved() const {
    Json r = resolved_;
    r.erase("output_dir");
    r.erase("workers");
    return r;
  }

 private:
  std::string name_, text_;
  Json root_;
  std::map<std::string, int> lines_;
  mutable Json resolved_;
};

/// Read-only view of one config value with typed, line-anchored accessors.
class Node {
 public:
  Node(const ConfigSource& src, const Json& j, std::string ptr) : src_(&src), j_(&j), ptr_(std::move(ptr)) {}
  static Node root(const ConfigSource& src) { return Node(src, src.root(), ""); }

  const std::string& ptr() const noexcept { return ptr_; }
  const Json& json() const noexcept { return *j_; }
  [[noreturn]] void fail(const std::string& msg) const { src_->fail(ptr_, msg); }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) fail("missing required key '" + key + "'");
    return Node(*src_, (*j_)[key], ptr_ + "/" + detail::escape_token(key));
  }

  Node at(std::size_t i) const {
    if (!j_->is_array()) fail("expected an array");
    if (i >= j_->size()) fail("index out of range");
    return Node(*src_, (*j_)[i], ptr_ + "/" + std::to_string(i));
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  /// Rejects keys outside `known` so that typos do not pass silently.
  void allow(std::initializer_list<const char*> known) const {
    if (!j_->is_object()) fail("expected an object");
    for (const auto& [k, v] : j_->items()) {
      bool ok = false;
      for (const char* n : known) ok = ok || k == n;
      if (!ok) Node(*src_, v, ptr_ + "/" + detail::escape_token(k)).fail("unknown key '" + k + "'");
    }
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
  std::uint64_t uint() const {
    if (!j_->is_number_unsigned()) fail("expected a nonnegative integer");
    return j_->get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }
  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> v;
    for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i).number());
    return v;
  }

  /// A dim-vector; a bare number is accepted when dim == 1.
  Vector vector(std::size_t dim) const {
    if (dim == 1 && j_->is_number()) return Vector::Constant(1, number());
    const auto v = numbers();
    if (v.size() != dim) fail("expected " + std::to_string(dim) + " entries");
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  /// Row-major rows x cols matrix; a bare number c means c * I when square.
  Matrix matrix(std::size_t rows, std::size_t cols) const {
    const auto r = static_cast<Eigen::Index>(rows), c = static_cast<Eigen::Index>(cols);
    if (j_->is_number()) {
      if (rows != cols && rows * cols != 1) fail("a scalar needs a square matrix");
      return number() * Matrix::Identity(r, c);
    }
    if (size() != rows) fail("expected " + std::to_string(rows) + " rows");
    Matrix m(r, c);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto row = at(i).numbers();
      if (row.size() != cols) at(i).fail("expected " + std::to_string(cols) + " columns");
      for (std::size_t k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
    return m;
  }

  // Optional keys: the default is recorded in the resolved config.
  double number_or(const std::string& key, double def) const {
    if (has(key)) return at(key).number();
    record(key, def);
    return def;
  }
  double positive_or(const std::string& key, double def) const {
    if (has(key)) return at(key).positive();
    record(key, def);
    return def;
  }
  std::uint64_t uint_or(const std::string& key, std::uint64_t def) const {
    if (has(key)) return at(key).uint();
    record(key, def);
    return def;
  }
  bool bool_or(const std::string& key, bool def) const {
    if (has(key)) return at(key).boolean();
    record(key, def);
    return def;
  }
  std::string string_or(const std::string& key, const std::string& def) const {
    if (has(key)) return at(key).string();
    record(key, def);
    return def;
  }
  std::vector<double> numbers_or(const std::string& key, const std::vector<double>& def) const {
    if (has(key)) return at(key).numbers();
    record(key, def);
    return def;
  }

  void record(const std::string& key, const Json& v) const {
    src_->resolve(ptr_ + "/" + detail::escape_token(key), v);
  }

  /// Child node, empty object when absent (recorded as such).
  Node section(const std::string& key) const {
    if (has(key)) {
      Node n = at(key);
      if (!n.json().is_object()) n.fail("expected an object");
      return n;
    }
    record(key, Json::object());
    static const Json empty = Json::object();
    return Node(*src_, empty, ptr_ + "/" + detail::escape_token(key));
  }

 private:
  const ConfigSource* src_;
  const Json* j_;
  std::string ptr_;
};

// ---------------------------------------------------------------------------
// Parsed pieces

/// Library validation errors become config errors anchored at `n`.
template <class Fn>
auto guarded(const Node& n, Fn fn) {
  try {
    return fn();
  } catch (const DomainError& e) {
    n.fail(e.what());
  } catch (const DimensionError& e) {
    n.fail(e.what());
  } catch (const std::invalid_argument& e) {
    n.fail(e.what());
  }
}

inline LevyTriplet parse_triplet(const Node& n) {
  n.allow({"dim", "drift", "diffusion", "atoms", "compensated"});
  const auto dim = static_cast<std::size_t>(n.at("dim").uint());
  if (dim == 0) n.at("dim").fail("must be positive");
  auto tr = LevyTriplet::make(dim);
  if (n.has("drift")) tr.drift = n.at("drift").vector(dim);
  else n.record("drift", std::vector<double>(dim, 0.0));
  if (n.has("diffusion")) tr.diffusion = n.at("diffusion").matrix(dim, dim);
  else n.record("diffusion", 0.0);
  if (n.has("atoms")) {
    const Node atoms = n.at("atoms");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Node a = atoms.at(i);
      a.allow({"x", "lambda"});
      const Vector x = a.at("x").vector(dim);
      const double lam = a.at("lambda").number();
      if (!(lam > 0.0)) a.at("lambda").fail("intensity must be positive");
      if (x.norm() == 0.0) a.at("x").fail("atom at 0 is not allowed");
      tr.jumps.atoms.push_back({x, lam});
    }
  } else {
    n.record("atoms", Json::array());
  }
  tr.compensated = n.bool_or("compensated", false);
  guarded(n, [&] {
    tr.validate();
    return 0;
  });
  return tr;
}

inline VectorField parse_field(const Node& n, std::size_t noise_dim) {
  n.allow({"name", "A", "scale", "offset", "lo", "hi", "allow_unbounded", "state_dim"});
  const std::string name = n.string_or("name", "constant");
  const auto state_dim = static_cast<std::size_t>(n.uint_or("state_dim", noise_dim));
  if (state_dim == 0) n.at("state_dim").fail("must be positive");
  Matrix A;
  if (n.has("A")) {
    A = n.at("A").matrix(state_dim, noise_dim);
  } else {
    if (state_dim != noise_dim) n.fail("A is required when state_dim differs from the noise dim");
    A = Matrix::Identity(static_cast<Eigen::Index>(state_dim), static_cast<Eigen::Index>(noise_dim));
    n.record("A", 1.0);
  }
  return guarded(n, [&] {
    if (name == "constant") return fields::constant(A);
    if (name == "tanh_scaled") return fields::tanh_scaled(A, n.number_or("scale", 1.0), n.number_or("offset", 0.0));
    if (name == "clamp_linear") return fields::clamp_linear(A, n.number_or("lo", -1.0), n.number_or("hi", 1.0));
    if (name == "linear") return fields::linear(A, n.bool_or("allow_unbounded", false));
    n.at("name").fail("unknown vector field '" + name + "' (constant, tanh_scaled, clamp_linear, linear)");
  });
}

/// zero | constant{value} | line{start?, end} | linear{times, values} | path{...}
inline CadlagPath parse_path(const Node& n, std::size_t dim, double T) {
  const std::string type = n.string_or("type", "zero");
  return guarded(n, [&]() -> CadlagPath {
    if (type == "zero") {
      n.allow({"type"});
      return CadlagPath::zero(dim, T);
    }
    if (type == "constant") {
      n.allow({"type", "value"});
      return CadlagPath::constant(n.at("value").vector(dim), T);
    }
    if (type == "line") {
      n.allow({"type", "start", "end"});
      const Vector start = n.has("start") ? n.at("start").vector(dim) : Vector::Zero(static_cast<Eigen::Index>(dim));
      return CadlagPath::line(start, n.at("end").vector(dim), T);
    }
    if (type == "linear") {
      n.allow({"type", "times", "values"});
      const auto times = n.at("times").numbers();
      const Node values = n.at("values");
      if (times.size() < 2 || times.front() != 0.0 || times.back() != T)
        n.at("times").fail("times must start at 0 and end at the horizon");
      if (values.size() != times.size()) values.fail("need one value per time");
      PathBuilder b(values.at(0).vector(dim));
      for (std::size_t k = 1; k < times.size(); ++k) b.linear_to(times[k], values.at(k).vector(dim));
      return b.build();
    }
    if (type == "path") {
      n.allow({"type", "dim", "T", "breakpoints", "values", "left_values", "modes"});
      CadlagPath p = path_from_json(n.json());
      if (p.dim() != dim) n.fail("path has dim " + std::to_string(p.dim()) + ", expected " + std::to_string(dim));
      if (p.horizon() != T) n.fail("path horizon differs from the config horizon");
      return p;
    }
    n.at("type").fail("unknown path type '" + type + "' (zero, constant, line, linear, path)");
  });
}

inline EventSpec parse_event(const Node& n, std::size_t state_dim) {
  n.allow({"type", "coordinate", "level", "tol", "target"});
  EventSpec e;
  e.event.type = guarded(n, [&] { return event_type_from_string(n.string_or("type", "terminal_ge")); });
  e.event.coordinate = static_cast<std::size_t>(n.uint_or("coordinate", 0));
  e.event.level = n.at("level").number();
  e.event.tol = n.positive_or("tol", 1e-3);
  e.target = guarded(n, [&] { return event_target_from_string(n.string_or("target", "Y")); });
  const std::size_t limit = e.target == EventSpec::Target::joint ? 3 * state_dim : state_dim;
  if (e.event.coordinate >= limit) n.at("coordinate").fail("coordinate out of range");
  return e;
}

inline std::vector<double> parse_eps_list(const Node& parent, const std::string& key,
                                          const std::vector<double>& def) {
  const auto eps = parent.numbers_or(key, def);
  guarded(parent.has(key) ? parent.at(key) : parent, [&] {
    ldplab::detail::check_eps_list(eps);
    return 0;
  });
  return eps;
}

/// Everything shared by the subcommands.
struct Common {
  std::uint64_t seed = 0;
  double horizon = 1.0;
  Sharding sharding;
  std::optional<LevyTriplet> triplet;
};

inline Common parse_common(const ConfigSource& src, int workers_override) {
  const Node root = Node::root(src);
  root.allow({"seed", "horizon", "block_size", "workers", "output_dir", "triplet", "field", "control", "event",
              "simulate", "characteristics", "skeleton", "rate", "verify", "probe", "comment"});
  Common c;
  c.seed = root.at("seed").uint();
  c.horizon = root.positive_or("horizon", 1.0);
  c.sharding.block_size = static_cast<std::size_t>(root.uint_or("block_size", 4096));
  if (c.sharding.block_size == 0) root.at("block_size").fail("must be positive");
  c.sharding.workers = static_cast<int>(root.uint_or("workers", 1));
  if (c.sharding.workers == 0) root.at("workers").fail("must be positive");
  if (workers_override > 0) c.sharding.workers = workers_override;
  if (root.has("triplet")) c.triplet = parse_triplet(root.at("triplet"));
  return c;
}

inline const LevyTriplet& need_triplet(const Common& c, const ConfigSource& src) {
  if (!c.triplet) src.fail("", "missing required key 'triplet'");
  return *c.triplet;
}

// ---------------------------------------------------------------------------
// Output helpers

struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<Artifact> files;
  std::string summary;  // one line for stdout
};

/// Shortest round-trip text for a double; inf and nan spelled out.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

/// JSON has no infinity; rates that are +inf are written as the string "inf".
inline Json jnum(double v) { return std::isfinite(v) ? Json(v) : Json(fmt(v)); }
inline Json jnum(const std::optional<double>& v) { return v ? jnum(*v) : Json(nullptr); }

class Csv {
 public:
  Csv(const std::string& title, const std::vector<std::pair<std::string, std::string>>& columns, const Json& config) {
    os_ << "# ldplab " << title << '\n';
    for (const auto& [name, doc] : columns) os_ << "# " << name << ": " << doc << '\n';
    os_ << "# config: " << config.dump() << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i].first;
    os_ << '\n';
  }
  template <class... Ts>
  void row(const Ts&... cells) {
    std::size_t i = 0;
    ((os_ << (i++ ? "," : "") << cell(cells)), ...);
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::optional<double>& v) { return fmt(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ostringstream os_;
};

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json atoms_json(const std::vector<JumpAtom>& atoms) {
  Json a = Json::array();
  for (const auto& at : atoms)
    a.push_back({{"x", std::vector<double>(at.size.data(), at.size.data() + at.size.size())}, {"lambda", at.intensity}});
  return a;
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r;
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

inline Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline void path_rows(Csv& csv, const CadlagPath& p, std::size_t points, std::optional<std::size_t> index = {}) {
  Vector buf(static_cast<Eigen::Index>(p.dim()));
  for (std::size_t k = 0; k < points; ++k) {
    const double t =
        k + 1 == points ? p.horizon() : p.horizon() * static_cast<double>(k) / static_cast<double>(points - 1);
    p.eval(t, {buf.data(), p.dim()});
    std::string line = index ? std::to_string(*index) + "," + fmt(t) : fmt(t);
    for (Eigen::Index i = 0; i < buf.size(); ++i) line += "," + fmt(buf[i]);
    csv.row(line);
  }
}

inline std::vector<std::pair<std::string, std::string>> path_columns(std::size_t dim, bool indexed,
                                                                     const std::string& what) {
  std::vector<std::pair<std::string, std::string>> cols;
  if (indexed) cols.push_back({"path", "sample index"});
  cols.push_back({"t", "time on a uniform grid over [0, T]"});
  for (std::size_t i = 0; i < dim; ++i)
    cols.push_back({what + std::to_string(i), "coordinate " + std::to_string(i) + " (right-continuous value)"});
  return cols;
}

// ---------------------------------------------------------------------------
// Subcommands

inline RunResult run_simulate(const ConfigSource& src, const Common& c) {
  const auto& tr = need_triplet(c, src);
  const Node s = Node::root(src).section("simulate");
  s.allow({"eps", "grid_step", "paths", "csv_points"});
  const double eps = s.positive_or("eps", 1.0);
  if (eps > 1.0) s.at("eps").fail("eps must lie in (0, 1]");
  const double step = s.positive_or("grid_step", 0.01);
  if (step > c.horizon) s.at("grid_step").fail("grid step exceeds the horizon");
  const auto count = static_cast<std::size_t>(s.uint_or("paths", 1));
  if (count == 0) s.at("paths").fail("must be positive");
  const auto points = static_cast<std::size_t>(s.uint_or("csv_points", 101));
  if (points < 2) s.at("csv_points").fail("need at least two points");

  const Json cfg = src.resolved();
  Json paths = Json::array();
  Csv csv("simulate", path_columns(tr.dim, true, "x"), cfg);
  for (std::size_t i = 0; i < count; ++i) {
    const auto p = simulate(tr, eps, c.horizon, step, derive_seed(c.seed, 0, i));
    paths.push_back(to_json(p));
    path_rows(csv, p, points, i);
  }
  Json out{{"config", cfg}, {"eps", eps}, {"paths", paths}};
  return {{{"simulate.json", dump(out)}, {"simulate.csv", csv.str()}},
          "simulate: " + std::to_string(count) + " path(s) at eps " + fmt(eps)};
}

inline RunResult run_characteristics(const ConfigSource& src, const Common& c) {
  const auto& tr = need_triplet(c, src);
  const Node root = Node::root(src);
  const Node s = root.section("characteristics");
  s.allow({"eps", "truncation", "t", "r", "lipschitz"});
  const auto eps_list = parse_eps_list(s, "eps", {0.5, 0.1, 0.02});
  const double b = s.positive_or("truncation", 1.0);
  const double t = s.positive_or("t", c.horizon);
  const double r = s.positive_or("r", 1.0);
  double lip = 1.0;
  if (s.has("lipschitz")) {
    lip = s.at("lipschitz").number();
    if (lip < 0) s.at("lipschitz").fail("must be nonnegative");
  } else if (root.has("field")) {
    lip = parse_field(root.at("field"), tr.dim).lipschitz();
    s.record("lipschitz", lip);
  } else {
    s.record("lipschitz", lip);
  }

  const Json cfg = src.resolved();
  Csv csv("characteristics",
          {{"eps", "noise scale"},
           {"t", "time at which the characteristics are evaluated"},
           {"B_norm", "|B^eps_t| with truncation at the configured level"},
           {"C_over_eps_norm", "operator norm of C^eps_t / eps"},
           {"nu_mass", "total mass of nu^eps per unit time"},
           {"drift_variation", "variation of t -> B^eps_t on [0, t]"},
           {"diffusion_over_eps", "|C^eps_t| / eps"},
           {"exp_jump_integral", "eps * integral of exp(|x|/(eps r) v 1) against nu^eps on [0, t]"},
           {"xi", "xi process at t for the configured Lipschitz constant"}},
          cfg);
  Json rows = Json::array();
  for (double eps : eps_list) {
    const auto ch = characteristics(tr, eps, b);
    const auto fam = three_families(tr, eps, t, b, r);
    const double xi = xi_process(tr, eps, t, lip);
    const Vector B = ch.B(t);
    const Matrix C = ch.C_over_eps(t);
    const double cnorm = C.size() ? Eigen::JacobiSVD<Matrix>(C).singularValues()(0) : 0.0;
    csv.row(eps, t, B.norm(), cnorm, ch.nu_total_mass(), fam.drift_variation, fam.diffusion_over_eps,
            fam.exp_jump_integral, xi);
    rows.push_back({{"eps", eps},
                    {"B", vector_json(B)},
                    {"C_over_eps", matrix_json(C)},
                    {"nu_eps", atoms_json(ch.nu_eps)},
                    {"nu_total_mass", ch.nu_total_mass()},
                    {"three_families",
                     {{"drift_variation", fam.drift_variation},
                      {"diffusion_over_eps", fam.diffusion_over_eps},
                      {"exp_jump_integral", fam.exp_jump_integral}}},
                    {"xi", xi}});
  }
  Json out{{"config", cfg}, {"t", t}, {"truncation", b}, {"rows", rows}};
  return {{{"characteristics.json", dump(out)}, {"characteristics.csv", csv.str()}},
          "characteristics: " + std::to_string(eps_list.size()) + " eps value(s)"};
}

inline RunResult run_skeleton(const ConfigSource& src, const Common& c) {
  const Node root = Node::root(src);
  const Node s = root.section("skeleton");
  s.allow({"noise", "step", "residual_step", "csv_points"});
  const std::size_t d = c.triplet ? c.triplet->dim : 1;
  const VectorField F = parse_field(root.section("field"), d);
  const CadlagPath u = parse_path(root.section("control"), F.state_dim(), c.horizon);
  const CadlagPath x = parse_path(s.section("noise"), F.noise_dim(), c.horizon);
  const double step = s.positive_or("step", 1e-3);
  const double rstep = s.positive_or("residual_step", step);
  const auto points = static_cast<std::size_t>(s.uint_or("csv_points", 101));
  if (points < 2) s.at("csv_points").fail("need at least two points");

  const Json cfg = src.resolved();
  const auto y = solve_skeleton(F, u, x, step);
  const double res = residual(F, u, x, y, rstep);
  Csv csv("skeleton", path_columns(y.dim(), false, "y"), cfg);
  path_rows(csv, y, points);
  Json out{{"config", cfg}, {"step", step}, {"residual", jnum(res)}, {"solution", to_json(y)}};
  return {{{"skeleton.json", dump(out)}, {"skeleton.csv", csv.str()}}, "skeleton: residual " + fmt(res)};
}

/// Rate model implied by the triplet: pure Gaussian with zero drift uses the
/// quadratic action, anything else the Legendre transform of the cumulant.
inline RateModel rate_model_for(const LevyTriplet& tr, const std::string& kind, double horizon, const Node& n) {
  const bool gaussian = tr.jumps.empty() && tr.drift.norm() == 0.0;
  if (kind == "brownian" || (kind == "auto" && gaussian)) {
    if (!gaussian) n.at("model").fail("brownian model needs a triplet without jumps and drift");
    return RateModel::brownian(tr.diffusion, 1.0, horizon);
  }
  if (kind == "levy" || kind == "auto") return RateModel::levy(tr, horizon);
  n.at("model").fail("unknown rate model '" + kind + "' (auto, brownian, levy)");
}

struct RatePlan {
  RateModel model;
  ControlGrid grid;
  OptimizerConfig opt;
  std::string model_kind;
};

inline RatePlan parse_rate_plan(const Node& s, const Common& c, const LevyTriplet& tr) {
  s.allow({"model", "segments", "starts", "stages", "penalty_start", "penalty_growth", "seed", "skeleton_step",
           "start_spread"});
  const std::string kind = s.string_or("model", "auto");
  RatePlan p{rate_model_for(tr, kind, c.horizon, s), ControlGrid{}, OptimizerConfig{}, kind};
  p.grid.m = static_cast<std::size_t>(s.uint_or("segments", 16));
  if (p.grid.m == 0) s.at("segments").fail("must be positive");
  p.opt.starts = static_cast<int>(s.uint_or("starts", 8));
  p.opt.stages = static_cast<int>(s.uint_or("stages", 5));
  if (p.opt.starts == 0) s.at("starts").fail("must be positive");
  if (p.opt.stages == 0) s.at("stages").fail("must be positive");
  p.opt.penalty_start = s.positive_or("penalty_start", 10.0);
  p.opt.penalty_growth = s.positive_or("penalty_growth", 10.0);
  p.opt.seed = s.uint_or("seed", c.seed);
  p.opt.start_spread = s.positive_or("start_spread", 0.5);
  p.opt.skeleton_step = s.positive_or("skeleton_step", c.horizon / 256.0);
  return p;
}

inline Json trace_json(const std::vector<TraceEntry>& trace) {
  Json t = Json::array();
  for (const auto& e : trace)
    t.push_back({{"start", e.start},
                 {"stage", e.stage},
                 {"penalty", e.penalty},
                 {"objective", jnum(e.objective)},
                 {"rate", jnum(e.rate)},
                 {"violation", jnum(e.violation)},
                 {"evaluations", e.evaluations}});
  return t;
}

/// Runs minimize_endpoint and turns its failures into NumericalFailure.
inline EndpointResult optimize(const RatePlan& p, const VectorField& F, const CadlagPath& u, const EventSpec& ev) {
  try {
    return minimize_endpoint(p.model, F, u, ev.event, p.grid, p.opt);
  } catch (const OptimizationError& e) {
    throw NumericalFailure(e.what(), {{"stage", "minimize_endpoint"}, {"trace", trace_json(e.trace())}});
  } catch (const ConvergenceError& e) {
    throw NumericalFailure(e.what(), {{"stage", "minimize_endpoint"},
                                      {"iterations", e.iterations()},
                                      {"last_iterate", vector_json(e.last_iterate())}});
  }
}

inline void require_solution_target(const EventSpec& ev, const Node& n) {
  if (ev.target != EventSpec::Target::solution) n.at("target").fail("rate minimisation needs an event on Y");
}

inline RunResult run_rate(const ConfigSource& src, const Common& c) {
  const auto& tr = need_triplet(c, src);
  const Node root = Node::root(src);
  const VectorField F = parse_field(root.section("field"), tr.dim);
  const CadlagPath u = parse_path(root.section("control"), F.state_dim(), c.horizon);
  const Node evn = root.at("event");
  const EventSpec ev = parse_event(evn, F.state_dim());
  require_solution_target(ev, evn);
  const RatePlan plan = parse_rate_plan(root.section("rate"), c, tr);

  const Json cfg = src.resolved();
  const auto r = optimize(plan, F, u, ev);
  Csv csv("rate trace",
          {{"start", "multi-start index (0 starts from the zero-cost control)"},
           {"stage", "penalty continuation stage"},
           {"penalty", "penalty weight of the stage"},
           {"objective", "rate + penalty * violation^2 at the stage optimum"},
           {"rate", "control rate at the stage optimum"},
           {"violation", "event violation at the stage optimum"},
           {"evaluations", "objective evaluations in the stage"}},
          cfg);
  for (const auto& e : r.trace) csv.row(e.start, e.stage, e.penalty, e.objective, e.rate, e.violation, e.evaluations);
  Json out{{"config", cfg},   {"rate", jnum(r.rate)},          {"feasible", r.feasible},
           {"segments", plan.grid.m}, {"x_star", to_json(r.x_star)}, {"y_star", to_json(r.y_star)},
           {"trace", trace_json(r.trace)}};
  return {{{"rate.json", dump(out)}, {"rate_trace.csv", csv.str()}}, "rate: " + fmt(r.rate)};
}

/// Closed-form tail family when the setup is one of the two solvable
/// baselines: 1-d noise, constant F, zero control, terminal_ge on Y.
inline std::optional<TailFamily> baseline_family(const LevyTriplet& tr, const VectorField& F, const CadlagPath& u,
                                                 const EventSpec& ev, double horizon) {
  if (tr.dim != 1 || F.state_dim() != 1 || F.name() != "constant") return std::nullopt;
  if (ev.target != EventSpec::Target::solution || ev.event.type != EndpointEvent::Type::terminal_ge)
    return std::nullopt;
  if (sup_norm(u, u.horizon()) != 0.0 || tr.drift_at(1.0).norm() != 0.0) return std::nullopt;
  const double a = F(Vector::Zero(1))(0, 0);
  TailFamily f;
  f.horizon = horizon;
  if (tr.jumps.empty() && tr.diffusion(0, 0) > 0.0 && a != 0.0) {
    f.kind = TailFamily::Kind::gaussian;
    f.sigma = std::abs(a) * std::sqrt(tr.diffusion(0, 0));
    return f;
  }
  if (tr.diffusion(0, 0) == 0.0 && tr.jumps.atoms.size() == 1 && !tr.compensated) {
    const double jump = a * tr.jumps.atoms[0].size[0];
    if (!(jump > 0.0)) return std::nullopt;
    f.kind = TailFamily::Kind::poisson;
    f.rate = tr.jumps.atoms[0].intensity;
    f.jump = jump;
    return f;
  }
  return std::nullopt;
}

inline Json curve_json(const RateCurve& c) {
  Json e = Json::array();
  for (const auto& r : c.entries)
    e.push_back({{"eps", r.eps},
                 {"samples", r.samples},
                 {"hits", r.hits},
                 {"p_hat", r.p_hat},
                 {"ci_low", r.ci_low},
                 {"ci_high", r.ci_high},
                 {"eps_log_p", jnum(r.eps_log_p)}});
  return {{"method", c.method}, {"entries", e}, {"fitted_limit", jnum(c.fitted_limit)}};
}

inline RunResult run_verify(const ConfigSource& src, const Common& c) {
  const auto& tr = need_triplet(c, src);
  const Node root = Node::root(src);
  const VectorField F = parse_field(root.section("field"), tr.dim);
  const CadlagPath u = parse_path(root.section("control"), F.state_dim(), c.horizon);
  const Node evn = root.at("event");
  const EventSpec ev = parse_event(evn, F.state_dim());
  const Node s = root.section("verify");
  s.allow({"eps", "samples", "grid_step", "solver_step", "exact", "exact_eps", "optimize"});
  const auto eps = parse_eps_list(s, "eps", {0.2, 0.1, 0.05});
  const auto N = static_cast<std::size_t>(s.uint_or("samples", 100000));
  if (N < 1000) s.at("samples").fail("need at least 1000 samples per eps");
  SamplingConfig sc;
  sc.horizon = c.horizon;
  sc.grid_step = s.positive_or("grid_step", 0.01);
  if (s.has("solver_step")) sc.solver_step = s.at("solver_step").positive();
  sc.sharding = c.sharding;
  const std::string exact_mode = s.string_or("exact", "auto");
  if (exact_mode != "auto" && exact_mode != "none") s.at("exact").fail("expected 'auto' or 'none'");
  const auto exact_eps = parse_eps_list(s, "exact_eps", {0.1, 0.05, 0.02, 0.01, 0.005});
  const bool run_opt = s.bool_or("optimize", ev.target == EventSpec::Target::solution);
  if (run_opt) require_solution_target(ev, evn);
  std::optional<RatePlan> plan;
  if (run_opt) plan = parse_rate_plan(root.section("rate"), c, tr);

  const Json cfg = src.resolved();
  const std::optional<TailFamily> fam =
      exact_mode == "auto" ? baseline_family(tr, F, u, ev, c.horizon) : std::nullopt;

  RateCurve mc;
  try {
    mc = rate_curve(tr, F, u, ev, eps, N, c.seed, sc);
  } catch (const DomainError& e) {
    throw NumericalFailure(e.what(), {{"stage", "rate_curve"}});
  }

  Csv csv("verify-ldp",
          {{"source", "monte_carlo or exact"},
           {"eps", "noise scale"},
           {"samples", "Monte Carlo sample count (0 for closed-form rows)"},
           {"hits", "samples in the event"},
           {"p_hat", "estimated (or exact) probability"},
           {"ci_low", "95% Clopper-Pearson lower bound"},
           {"ci_high", "95% Clopper-Pearson upper bound"},
           {"eps_log_p", "eps * ln p_hat, empty when p_hat = 0"},
           {"exact_p", "closed-form probability at this eps, empty when unavailable"},
           {"z", "(p_hat - exact_p) / binomial sigma, Monte Carlo rows only"},
           {"within_3sigma", "1 when |z| <= 3"}},
          cfg);
  Json summary{{"config", cfg}, {"monte_carlo", curve_json(mc)}};
  Json cells = Json::array();
  bool all_within = true;
  for (const auto& e : mc.entries) {
    if (fam) {
      const double p = fam->tail(ev.event.level, e.eps);
      const double sig = stats::binomial_sigma(p, e.samples);
      const double z = sig > 0 ? (e.p_hat - p) / sig : (e.p_hat == p ? 0.0 : kInfinity);
      const bool ok = std::abs(z) <= 3.0;
      all_within = all_within && ok;
      csv.row("monte_carlo", e.eps, e.samples, e.hits, e.p_hat, e.ci_low, e.ci_high, e.eps_log_p, p, z, ok);
      cells.push_back({{"eps", e.eps}, {"p_hat", e.p_hat}, {"exact_p", p}, {"z", jnum(z)}, {"within_3sigma", ok}});
    } else {
      csv.row("monte_carlo", e.eps, e.samples, e.hits, e.p_hat, e.ci_low, e.ci_high, e.eps_log_p, "", "", "");
    }
  }
  std::optional<double> reference;
  if (fam) {
    const RateCurve ex = exact_tail_curve(*fam, ev.event.level, exact_eps);
    for (const auto& e : ex.entries)
      csv.row("exact", e.eps, e.samples, e.hits, e.p_hat, e.ci_low, e.ci_high, e.eps_log_p, e.p_hat, "", "");
    const double analytic = -fam->limit(ev.event.level);
    summary["exact"] = curve_json(ex);
    summary["exact"]["family"] = fam->kind == TailFamily::Kind::gaussian ? "gaussian" : "poisson";
    summary["analytic_rate"] = analytic;
    summary["oracle_comparison"] = {{"cells", cells}, {"all_within_3sigma", all_within}};
    reference = ex.fitted_limit;
  }
  std::string line = "verify-ldp: fitted_limit " + fmt(mc.fitted_limit);
  if (plan) {
    const auto r = optimize(*plan, F, u, ev);
    summary["optimizer_rate"] = jnum(r.rate);
    summary["optimizer_segments"] = plan->grid.m;
    const auto lim = reference ? reference : mc.fitted_limit;
    if (lim) summary["limit_vs_optimizer"] = jnum(std::abs(*lim + r.rate));
    line += ", optimizer rate " + fmt(r.rate);
  }
  summary["fitted_limit"] = jnum(mc.fitted_limit);
  if (fam) line += ", analytic rate " + fmt(summary["analytic_rate"].get<double>());
  return {{{"verify-ldp.json", dump(summary)}, {"verify-ldp.csv", csv.str()}}, line};
}

inline RunResult run_probe(const ConfigSource& src, const Common& c) {
  const Node root = Node::root(src);
  const Node s = root.at("probe");
  const std::string kind = s.at("kind").string();
  Json cfg;
  Json rows = Json::array();
  std::string csv_text, line;
  bool violated = false;

  if (kind == "tightness") {
    const auto& tr = need_triplet(c, src);
    s.allow({"kind", "statistic", "rho", "r", "eps", "a", "samples", "on_solution", "grid_step", "solver_step"});
    ProbeStatistic st;
    st.kind = guarded(s, [&] { return probe_statistic_from_string(s.string_or("statistic", "sup_norm")); });
    st.rho = s.positive_or("rho", 0.1);
    st.r = s.positive_or("r", 1.0);
    if (st.kind == ProbeStatistic::Kind::skorokhod_modulus && !(st.rho < c.horizon))
      s.at("rho").fail("rho must be below the horizon");
    const auto eps = parse_eps_list(s, "eps", {0.5, 0.2, 0.1});
    const auto a = s.numbers_or("a", {0.5, 1.0, 2.0});
    const auto N = static_cast<std::size_t>(s.uint_or("samples", 10000));
    if (N == 0) s.at("samples").fail("must be positive");
    const bool on_y = s.bool_or("on_solution", false);
    SamplingConfig sc;
    sc.horizon = c.horizon;
    sc.grid_step = s.positive_or("grid_step", 0.01);
    if (s.has("solver_step")) sc.solver_step = s.at("solver_step").positive();
    sc.sharding = c.sharding;
    const VectorField F = parse_field(root.section("field"), tr.dim);
    const CadlagPath u = parse_path(root.section("control"), F.state_dim(), c.horizon);
    cfg = src.resolved();
    const auto table = tightness_probe(st, tr, F, u, eps, a, N, c.seed, on_y, sc);
    Csv csv("probe tightness",
            {{"eps", "noise scale"},
             {"a", "exceedance level"},
             {"samples", "sample count"},
             {"hits", "samples with statistic >= a"},
             {"p_hat", "hits / samples"},
             {"ci_low", "95% Clopper-Pearson lower bound"},
             {"ci_high", "95% Clopper-Pearson upper bound"},
             {"eps_log_p", "eps * ln p_hat, empty when p_hat = 0"},
             {"stat_mean", "sample mean of the statistic at this eps"},
             {"stat_sd", "sample standard deviation of the statistic at this eps"}},
            cfg);
    for (const auto& r : table) {
      csv.row(r.eps, r.a, r.samples, r.hits, r.p_hat, r.ci_low, r.ci_high, r.eps_log_p, r.stat_mean, r.stat_sd);
      rows.push_back({{"eps", r.eps}, {"a", r.a}, {"hits", r.hits}, {"p_hat", r.p_hat}, {"eps_log_p", jnum(r.eps_log_p)}});
    }
    csv_text = csv.str();
    line = "probe tightness: " + std::to_string(table.size()) + " rows";
  } else if (kind == "bound") {
    const auto& tr = need_triplet(c, src);
    s.allow({"kind", "eps", "t", "a", "b", "samples"});
    if (tr.dim != 1) root.at("triplet").fail("the bound check needs a one-dimensional triplet");
    if (tr.jumps.empty()) root.at("triplet").fail("the bound check needs at least one atom");
    const double eps = s.positive_or("eps", 1.0);
    if (eps > 1.0) s.at("eps").fail("eps must lie in (0, 1]");
    const double t = s.positive_or("t", c.horizon);
    const auto a = s.numbers_or("a", default_bound_a_grid());
    const auto b = s.numbers_or("b", default_bound_b_grid());
    const auto N = static_cast<std::size_t>(s.uint_or("samples", 100000));
    if (N == 0) s.at("samples").fail("must be positive");
    cfg = src.resolved();
    const auto table = guarded(s, [&] { return pure_disc_bound_check(tr.jumps, eps, t, a, b, N, c.seed, c.sharding); });
    Csv csv("probe bound",
            {{"a", "level for sup |M|"},
             {"b", "cap on the sum of squared jumps"},
             {"samples", "sample count"},
             {"hits", "samples with sup |M| >= a and sum |dM|^2 < b"},
             {"empirical", "hits / samples"},
             {"sigma", "binomial standard error of empirical"},
             {"theta", "min(1/(2A), a/(2Cb))"},
             {"bound", "2 exp(-theta a + C theta^2 b)"},
             {"ok", "1 when empirical <= bound + 3 sigma"}},
            cfg);
    for (const auto& r : table) {
      csv.row(r.a, r.b, r.samples, r.hits, r.empirical, r.sigma, r.theta, r.bound, r.ok);
      rows.push_back({{"a", r.a}, {"b", r.b}, {"empirical", r.empirical}, {"bound", r.bound}, {"ok", r.ok}});
      violated = violated || !r.ok;
    }
    csv_text = csv.str();
    line = std::string("probe bound: ") + (violated ? "VIOLATED" : "all cells within bound");
  } else if (kind == "slominski") {
    const auto& tr = need_triplet(c, src);
    s.allow({"kind", "eps", "p", "samples", "grid_step"});
    const auto eps = parse_eps_list(s, "eps", {0.5, 0.1});
    const auto p = s.numbers_or("p", {2.0, 4.0, 8.0});
    for (double v : p)
      if (!(v > 0.0)) s.at("p").fail("p values must be positive");
    const auto N = static_cast<std::size_t>(s.uint_or("samples", 2000));
    if (N == 0) s.at("samples").fail("must be positive");
    const double step = s.positive_or("grid_step", 0.01);
    cfg = src.resolved();
    const auto table = slominski_probe(tr, eps, p, N, c.horizon, c.seed, step, c.sharding);
    Csv csv("probe slominski",
            {{"eps", "noise scale"},
             {"p", "threshold index; crossing level is 1/p"},
             {"min_gap", "smallest gap between consecutive crossing times over all samples"},
             {"q01", "1% quantile of the per-path minimal gap"},
             {"q05", "5% quantile of the per-path minimal gap"},
             {"median", "median of the per-path minimal gap"},
             {"max_oscillation", "largest oscillation between consecutive crossing times"},
             {"median_oscillation", "median over paths of that oscillation"}},
            cfg);
    for (const auto& r : table) {
      csv.row(r.eps, r.p, r.min_gap, r.q01, r.q05, r.median, r.max_oscillation, r.median_oscillation);
      rows.push_back({{"eps", r.eps}, {"p", r.p}, {"min_gap", r.min_gap}, {"median", r.median}});
    }
    csv_text = csv.str();
    line = "probe slominski: " + std::to_string(table.size()) + " rows";
  } else if (kind == "uet") {
    const auto& tr = need_triplet(c, src);
    s.allow({"kind", "eps", "a", "samples", "grid_step"});
    const auto eps = parse_eps_list(s, "eps", {0.5, 0.2, 0.1});
    const auto a = s.numbers_or("a", {0.5, 1.0, 2.0});
    const auto N = static_cast<std::size_t>(s.uint_or("samples", 10000));
    if (N == 0) s.at("samples").fail("must be positive");
    SamplingConfig sc;
    sc.horizon = c.horizon;
    sc.grid_step = s.positive_or("grid_step", 0.01);
    sc.sharding = c.sharding;
    cfg = src.resolved();
    const auto table = uet_probe(tr, eps, a, N, c.seed, sc);
    Csv csv("probe uet",
            {{"eps", "noise scale"},
             {"integrand", "plus_one, minus_one, sign_flip (switch at T/2) or feedback (sign of the integral)"},
             {"a", "level for sup |(H . X)_t|"},
             {"hits", "samples with sup |(H . X)_t| >= a"},
             {"p_hat", "hits / samples"},
             {"eps_log_p", "eps * ln p_hat, empty when p_hat = 0"}},
            cfg);
    for (const auto& r : table) {
      csv.row(r.eps, std::string(to_string(r.integrand)), r.a, r.hits, r.p_hat, r.eps_log_p);
      rows.push_back({{"eps", r.eps}, {"integrand", to_string(r.integrand)}, {"a", r.a}, {"p_hat", r.p_hat}});
    }
    csv_text = csv.str();
    line = "probe uet: " + std::to_string(table.size()) + " rows";
  } else {
    s.at("kind").fail("unknown probe kind '" + kind + "' (tightness, bound, slominski, uet)");
  }
  Json out{{"config", cfg}, {"kind", kind}, {"rows", rows}};
  if (violated)
    throw NumericalFailure("bound check observed empirical > bound + 3 sigma",
                           {{"stage", "pure_disc_bound_check"}, {"rows", rows}});
  return {{{"probe.json", dump(out)}, {"probe.csv", csv_text}}, line};
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> v{"simulate", "characteristics", "skeleton", "rate", "verify-ldp", "probe"};
  return v;
}

/// Parses the config and runs one subcommand. Throws ConfigError for bad
/// input and NumericalFailure when a method gives up.
inline RunResult run(const std::string& sub, const ConfigSource& src, int workers_override = 0) {
  const Common c = parse_common(src, workers_override);
  try {
    if (sub == "simulate") return run_simulate(src, c);
    if (sub == "characteristics") return run_characteristics(src, c);
    if (sub == "skeleton") return run_skeleton(src, c);
    if (sub == "rate") return run_rate(src, c);
    if (sub == "verify-ldp") return run_verify(src, c);
    if (sub == "probe") return run_probe(src, c);
  } catch (const ConvergenceError& e) {
    throw NumericalFailure(e.what(), {{"stage", sub},
                                      {"iterations", e.iterations()},
                                      {"last_iterate", vector_json(e.last_iterate())}});
  }
  throw std::invalid_argument("unknown subcommand '" + sub + "'");
}

}  // namespace ldplab::experiment
