#include "spdesens/config.hpp"

#include "spdesens/gamma.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace spdesens {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : s_(text), line_(line) {}

  ConfigValue parse_all() {
    ConfigValue v = parse();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  ConfigValue parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '[') return parse_sequence(']', ConfigValue::Kind::List);
    if (c == '(') return parse_sequence(')', ConfigValue::Kind::Tuple);
    if (c == '"') return parse_string();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') {
      return parse_number();
    }
    if (ident_start(c)) return parse_word();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  ConfigValue parse_sequence(char close, ConfigValue::Kind kind) {
    ConfigValue v;
    v.kind = kind;
    ++pos_;
    if (peek(close)) {
      ++pos_;
      return v;
    }
    while (true) {
      v.items.push_back(parse());
      if (peek(',')) {
        ++pos_;
        continue;
      }
      expect(close);
      return v;
    }
  }

  ConfigValue parse_string() {
    const std::size_t end = s_.find('"', pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    ConfigValue v;
    v.kind = ConfigValue::Kind::Word;
    v.text = std::string(s_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return v;
  }

  ConfigValue parse_number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
                                std::string_view("+-.eE/").find(s_[pos_]) != std::string_view::npos)) {
      ++pos_;
    }
    ConfigValue v;
    v.text = std::string(s_.substr(start, pos_ - start));
    const std::string_view body =
        v.text.front() == '+' ? std::string_view(v.text).substr(1) : std::string_view(v.text);
    const std::size_t slash = body.find('/');
    double value = 0.0;
    auto read = [&](std::string_view part, double& out) {
      const auto res = std::from_chars(part.data(), part.data() + part.size(), out);
      return res.ec == std::errc() && res.ptr == part.data() + part.size();
    };
    if (slash == std::string_view::npos) {
      if (!read(body, value)) fail("malformed number '" + v.text + "'");
    } else {
      double num = 0.0;
      double den = 0.0;
      if (!read(body.substr(0, slash), num) || !read(body.substr(slash + 1), den) || den == 0.0) {
        fail("malformed number '" + v.text + "'");
      }
      value = num / den;
    }
    v.number = value;
    return v;
  }

  ConfigValue parse_word() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    ConfigValue v;
    v.kind = ConfigValue::Kind::Word;
    v.text = std::string(s_.substr(start, pos_ - start));
    if (v.text == "inf") {
      v.kind = ConfigValue::Kind::Number;
      v.number = std::numeric_limits<double>::infinity();
      return v;
    }
    if (peek('(')) {
      ConfigValue args = parse_sequence(')', ConfigValue::Kind::Tuple);
      v.kind = ConfigValue::Kind::Call;
      v.items = std::move(args.items);
    } else if (peek('{')) {
      ++pos_;
      v.kind = ConfigValue::Kind::Object;
      if (peek('}')) {
        ++pos_;
        return v;
      }
      while (true) {
        skip_ws();
        const std::size_t key_start = pos_;
        while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
        if (pos_ == key_start) fail("expected a key inside '" + v.text + " { }'");
        std::string key(s_.substr(key_start, pos_ - key_start));
        expect('=');
        v.fields.emplace_back(std::move(key), parse());
        if (peek(',')) {
          ++pos_;
          continue;
        }
        expect('}');
        break;
      }
    }
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

int bracket_balance(std::string_view s) {
  int depth = 0;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '[' || c == '(' || c == '{') ++depth;
    if (c == ']' || c == ')' || c == '}') --depth;
  }
  return depth;
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

// ---- typed accessors -------------------------------------------------------

std::string where(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

double as_double(const ConfigValue& v, const std::string& at) {
  if (v.kind != ConfigValue::Kind::Number) throw ConfigError(at + ": expected a number, got " + v.describe());
  return v.number;
}

double as_positive(const ConfigValue& v, const std::string& at) {
  const double x = as_double(v, at);
  if (!(x > 0.0)) throw ConfigError(at + ": must be positive");
  return x;
}

std::int64_t as_integer(const ConfigValue& v, const std::string& at) {
  const double x = as_double(v, at);
  if (x != std::floor(x) || std::abs(x) > 9.0e15) throw ConfigError(at + ": expected an integer");
  return static_cast<std::int64_t>(x);
}

std::size_t as_count(const ConfigValue& v, const std::string& at) {
  const auto n = as_integer(v, at);
  if (n < 0) throw ConfigError(at + ": must be nonnegative");
  return static_cast<std::size_t>(n);
}

std::uint64_t as_seed(const ConfigValue& v, const std::string& at) {
  if (v.kind == ConfigValue::Kind::Number && v.text.find_first_of(".eE/") == std::string::npos) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (res.ec == std::errc() && res.ptr == v.text.data() + v.text.size()) return out;
  }
  throw ConfigError(at + ": expected a nonnegative integer seed");
}

bool as_bool(const ConfigValue& v, const std::string& at) {
  if (v.kind == ConfigValue::Kind::Word && (v.text == "true" || v.text == "false")) return v.text == "true";
  throw ConfigError(at + ": expected true or false");
}

std::string as_word(const ConfigValue& v, const std::string& at) {
  if (v.kind != ConfigValue::Kind::Word) throw ConfigError(at + ": expected a name, got " + v.describe());
  return v.text;
}

std::vector<double> as_list(const ConfigValue& v, const std::string& at) {
  if (v.kind == ConfigValue::Kind::Number) return {v.number};
  if (v.kind != ConfigValue::Kind::List && v.kind != ConfigValue::Kind::Tuple) {
    throw ConfigError(at + ": expected a list of numbers");
  }
  std::vector<double> out;
  for (const auto& item : v.items) out.push_back(as_double(item, at));
  return out;
}

StateVector as_vector(const ConfigValue& v, Eigen::Index d, const std::string& at) {
  if (v.kind == ConfigValue::Kind::Number) return StateVector::Constant(d, v.number);
  if (v.kind == ConfigValue::Kind::Call && v.text == "axis") {
    if (v.items.size() != 1) throw ConfigError(at + ": axis(k) takes one index");
    const auto k = as_integer(v.items[0], at);
    if (k < 1 || k > d) throw ConfigError(at + ": axis index out of range 1.." + std::to_string(d));
    return StateVector::Unit(d, static_cast<Eigen::Index>(k - 1));
  }
  const auto xs = as_list(v, at);
  if (static_cast<Eigen::Index>(xs.size()) != d) {
    throw ConfigError(at + ": expected " + std::to_string(d) + " entries, got " + std::to_string(xs.size()));
  }
  return Eigen::Map<const StateVector>(xs.data(), d);
}

Eigen::MatrixXd identity_like(Eigen::Index rows, Eigen::Index cols) {
  return Eigen::MatrixXd::Identity(rows, cols);
}

Eigen::MatrixXd as_matrix(const ConfigValue& v, Eigen::Index rows, Eigen::Index cols,
                          const std::string& at) {
  if (v.kind == ConfigValue::Kind::Number) return v.number * identity_like(rows, cols);
  if (v.kind == ConfigValue::Kind::Word) {
    if (v.text == "identity") return identity_like(rows, cols);
    if (v.text == "zero") return Eigen::MatrixXd::Zero(rows, cols);
    throw ConfigError(at + ": unknown matrix '" + v.text + "'");
  }
  if (v.kind == ConfigValue::Kind::Call && v.text == "random") {
    if (v.items.size() != 2) throw ConfigError(at + ": random(norm, seed) takes two arguments");
    if (rows != cols) throw ConfigError(at + ": random(norm, seed) needs a square matrix");
    return fixtures::random_matrix(static_cast<std::size_t>(rows), as_double(v.items[0], at),
                                   as_seed(v.items[1], at));
  }
  if (v.kind != ConfigValue::Kind::List || static_cast<Eigen::Index>(v.items.size()) != rows) {
    throw ConfigError(at + ": expected a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = as_list(v.items[static_cast<std::size_t>(i)], at);
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(at + ": row " + std::to_string(i + 1) + " needs " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

void reject_unknown_fields(const ConfigValue& obj, std::initializer_list<const char*> allowed,
                           const std::string& at) {
  std::vector<std::string> bad;
  for (const auto& [key, value] : obj.fields) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad.push_back(key);
    }
  }
  if (!bad.empty()) {
    std::string msg = at + ": unknown keys in " + obj.text + " {}:";
    for (const auto& b : bad) msg += " " + b;
    throw ConfigError(msg);
  }
}

const ConfigValue* field(const ConfigValue& obj, const std::string& key) {
  for (const auto& [k, v] : obj.fields) {
    if (k == key) return &v;
  }
  return nullptr;
}

/// Builds f, G (cols = 1) or B (cols = d_W) from a built-in selection.
FieldPtr build_field(const ConfigValue& v, bool diffusion, Eigen::Index d, Eigen::Index dw,
                     const std::string& at) {
  const Eigen::Index cols = diffusion ? dw : 1;
  if (v.kind == ConfigValue::Kind::Word && v.text == "zero") return make_zero(d, cols);
  if (v.kind != ConfigValue::Kind::Object) {
    throw ConfigError(at + ": expected zero, affine {...} or nemytskii {...}");
  }
  if (v.text == "affine") {
    if (diffusion) {
      reject_unknown_fields(v, {"offset", "linear"}, at);
      Eigen::MatrixXd offset = Eigen::MatrixXd::Zero(d, dw);
      if (const auto* o = field(v, "offset")) offset = as_matrix(*o, d, dw, at + ".offset");
      std::vector<Eigen::MatrixXd> linear;
      if (const auto* l = field(v, "linear")) {
        if (l->kind != ConfigValue::Kind::List || static_cast<Eigen::Index>(l->items.size()) != dw) {
          throw ConfigError(at + ".linear: expected a list of d_w = " + std::to_string(dw) + " matrices");
        }
        for (const auto& item : l->items) linear.push_back(as_matrix(item, d, d, at + ".linear"));
      }
      return make_affine_diffusion(std::move(offset), std::move(linear));
    }
    reject_unknown_fields(v, {"offset", "linear", "mark_scaled"}, at);
    StateVector offset = StateVector::Zero(d);
    Eigen::MatrixXd linear = Eigen::MatrixXd::Zero(d, d);
    bool scaled = false;
    if (const auto* o = field(v, "offset")) offset = as_vector(*o, d, at + ".offset");
    if (const auto* l = field(v, "linear")) linear = as_matrix(*l, d, d, at + ".linear");
    if (const auto* s = field(v, "mark_scaled")) scaled = as_bool(*s, at + ".mark_scaled");
    return make_affine(std::move(offset), std::move(linear), scaled);
  }
  if (v.text == "nemytskii") {
    reject_unknown_fields(v, {"L", "L_scale", "L_seed", "n_max", "scale", "sigma", "mark_scaled"}, at);
    double l_scale = 1.0;
    std::uint64_t l_seed = 7;
    int n_max = 4;
    double scale = 1.0;
    bool scaled = false;
    if (const auto* x = field(v, "L_scale")) l_scale = as_double(*x, at + ".L_scale");
    if (const auto* x = field(v, "L_seed")) l_seed = as_seed(*x, at + ".L_seed");
    if (const auto* x = field(v, "n_max")) n_max = static_cast<int>(as_integer(*x, at + ".n_max"));
    if (const auto* x = field(v, "scale")) scale = as_double(*x, at + ".scale");
    if (const auto* x = field(v, "mark_scaled")) scaled = as_bool(*x, at + ".mark_scaled");
    if (n_max < 1 || n_max > GammaFunction::kMaxOrder) {
      throw ConfigError(at + ".n_max: must lie in 1.." + std::to_string(GammaFunction::kMaxOrder));
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(d, d);
    const ConfigValue* lv = field(v, "L");
    if (lv && lv->kind == ConfigValue::Kind::Word && lv->text == "random") {
      L = fixtures::random_matrix(static_cast<std::size_t>(d), l_scale, l_seed);
    } else if (lv && !(lv->kind == ConfigValue::Kind::Word && lv->text == "identity")) {
      if (field(v, "L_scale") || field(v, "L_seed")) {
        throw ConfigError(at + ": L_scale and L_seed apply only to L = identity or L = random");
      }
      L = as_matrix(*lv, d, d, at + ".L");
    } else {
      L *= l_scale;
    }
    std::optional<Eigen::MatrixXd> sigma;
    if (const auto* s = field(v, "sigma")) {
      sigma = as_matrix(*s, d, cols, at + ".sigma");
    } else if (diffusion) {
      sigma = identity_like(d, dw);
    }
    return make_nemytskii(std::move(L), n_max, scale, std::move(sigma), scaled);
  }
  throw ConfigError(at + ": unknown coefficient '" + v.text + "'");
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"space", {"d", "spectrum", "c", "eigenvalues"}},
      {"noise", {"lambda", "marks", "marks_density_table", "d_w", "dt", "T", "seed"}},
      {"coefficients", {"f", "B", "G", "G1", "G2"}},
      {"initial", {"u0"}},
      {"norms", {"p", "q", "window", "deltas"}},
      {"verify",
       {"epsilons", "directions", "direction_seed", "h", "order", "order_directions", "paths",
        "pairs", "pair_seed", "magnitudes", "windows", "frozen_path", "component", "tol_abs",
        "band_lo", "band_hi"}},
      {"plan", {"n", "m", "p", "q", "budget"}},
      {"output", {"out"}},
  };
  return keys;
}

}  // namespace

std::string ConfigValue::describe() const {
  switch (kind) {
    case Kind::Number: return text.empty() ? std::to_string(number) : text;
    case Kind::Word: return "'" + text + "'";
    case Kind::List: return "a list";
    case Kind::Tuple: return "a tuple";
    case Kind::Call: return text + "(...)";
    case Kind::Object: return text + " {...}";
  }
  return "a value";
}

const ConfigValue* ConfigDocument::find(const std::string& section, const std::string& key) const {
  const auto it = sections.find(section);
  if (it == sections.end()) return nullptr;
  for (const auto& [k, v] : it->second) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ConfigDocument parse_config_text(const std::string& text) {
  ConfigDocument doc;
  doc.hash = fnv1a(text);
  std::istringstream in(text);
  std::string raw;
  std::string pending;
  int line_no = 0;
  int pending_line = 0;
  std::string section;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (pending.empty()) {
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
        section = trim(std::string_view(line).substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
        doc.sections[section];
        continue;
      }
      pending_line = line_no;
    }
    pending += (pending.empty() ? "" : " ") + line;
    if (bracket_balance(pending) > 0) continue;
    const std::size_t eq = pending.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(pending_line) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(pending_line) + ": key outside of any [section]");
    }
    const std::string key = trim(std::string_view(pending).substr(0, eq));
    if (key.empty() || !std::all_of(key.begin(), key.end(), ident_char)) {
      throw ConfigError("line " + std::to_string(pending_line) + ": bad key '" + key + "'");
    }
    auto& entries = doc.sections[section];
    if (std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; })) {
      throw ConfigError("line " + std::to_string(pending_line) + ": duplicate key " + where(section, key));
    }
    ValueParser parser(std::string_view(pending).substr(eq + 1), pending_line);
    entries.emplace_back(key, parser.parse_all());
    pending.clear();
  }
  if (!pending.empty()) {
    throw ConfigError("line " + std::to_string(pending_line) + ": unbalanced brackets");
  }
  return doc;
}

PlanSettings plan_settings(const ConfigDocument& doc) {
  auto get = [&](const char* section, const char* key) { return doc.find(section, key); };
  PlanSettings plan;
  auto exact = [](const ConfigValue& v, const std::string& at) {
    if (v.kind != ConfigValue::Kind::Number) throw ConfigError(at + ": expected a number");
    return v.text;
  };
  if (const auto* v = get("plan", "n")) plan.n = static_cast<int>(as_integer(*v, "[plan] n"));
  if (const auto* v = get("plan", "m")) plan.m = exact(*v, "[plan] m");
  if (const auto* v = get("plan", "p")) plan.p = exact(*v, "[plan] p");
  if (const auto* v = get("plan", "q")) plan.q = exact(*v, "[plan] q");
  if (const auto* v = get("plan", "budget")) {
    if (v->kind != ConfigValue::Kind::List) throw ConfigError("[plan] budget: expected [p0, p1, ..., pn]");
    std::vector<std::string> b;
    for (const auto& item : v->items) b.push_back(exact(item, "[plan] budget"));
    plan.budget = std::move(b);
  }

  return plan;
}

RunConfig build_config(const ConfigDocument& doc) {
  std::vector<std::string> unknown;
  for (const auto& [section, entries] : doc.sections) {
    const auto it = schema().find(section);
    for (const auto& [key, value] : entries) {
      if (it == schema().end() || !it->second.count(key)) unknown.push_back(where(section, key));
    }
    if (it == schema().end() && entries.empty()) unknown.push_back("[" + section + "]");
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }
  auto get = [&](const char* section, const char* key) { return doc.find(section, key); };
  auto require = [&](const char* section, const char* key) {
    const ConfigValue* v = doc.find(section, key);
    if (!v) throw ConfigError(std::string("missing required key '") + key + "' in [" + section + "]");
    return v;
  };

  RunConfig cfg;
  cfg.hash = doc.hash;

  // [space]
  std::vector<double> spectrum;
  const ConfigValue* dv = get("space", "d");
  const ConfigValue* sv = get("space", "spectrum");
  const ConfigValue* ev = get("space", "eigenvalues");
  if (ev && sv) throw ConfigError("[space]: give either spectrum or eigenvalues, not both");
  if (!ev && sv && sv->kind != ConfigValue::Kind::Word) ev = sv;
  if (ev) {
    spectrum = as_list(*ev, "[space] eigenvalues");
    if (get("space", "c")) throw ConfigError("[space] c applies only to spectrum = quadratic");
    if (dv && as_count(*dv, "[space] d") != spectrum.size()) {
      throw ConfigError("[space]: d does not match the number of eigenvalues");
    }
  } else {
    if (sv && as_word(*sv, "[space] spectrum") != "quadratic") {
      throw ConfigError("[space] spectrum: expected quadratic or a list of eigenvalues");
    }
    const std::size_t d = as_count(*require("space", "d"), "[space] d");
    if (d == 0) throw ConfigError("[space] d: must be positive");
    const double c = get("space", "c") ? as_double(*get("space", "c"), "[space] c") : 1.0;
    if (!(c >= 0.0)) throw ConfigError("[space] c: must be nonnegative");
    spectrum = SpectralOperator::quadratic(d, c).eigenvalues();
  }
  const auto d = static_cast<Eigen::Index>(spectrum.size());

  // [noise]
  Problem& pr = cfg.problem;
  pr.horizon = as_positive(*require("noise", "T"), "[noise] T");
  pr.dt = as_positive(*require("noise", "dt"), "[noise] dt");
  if (pr.dt > pr.horizon) throw ConfigError("[noise] dt: must not exceed T");
  pr.wiener_dim = get("noise", "d_w") ? as_count(*get("noise", "d_w"), "[noise] d_w") : 0;
  if (const auto* s = get("noise", "seed")) {
    pr.seed = as_seed(*s, "[noise] seed");
    cfg.seed_given = true;
  }
  const double intensity = get("noise", "lambda") ? as_double(*get("noise", "lambda"), "[noise] lambda") : 0.0;
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) throw ConfigError("[noise] lambda: must be finite and nonnegative");
  const auto* marks = get("noise", "marks");
  const auto* table = get("noise", "marks_density_table");
  if (marks && table) throw ConfigError("[noise]: give marks or marks_density_table, not both");
  try {
    if (marks) {
      if (marks->kind != ConfigValue::Kind::List || marks->items.empty()) {
        throw ConfigError("[noise] marks: expected [(z, weight), ...]");
      }
      std::vector<double> zs;
      std::vector<double> ws;
      for (const auto& item : marks->items) {
        if (item.kind != ConfigValue::Kind::Tuple || item.items.size() != 2) {
          throw ConfigError("[noise] marks: each entry must be a pair (z, weight)");
        }
        zs.push_back(as_double(item.items[0], "[noise] marks"));
        ws.push_back(as_double(item.items[1], "[noise] marks"));
      }
      pr.marks = MarkSpace::finite(std::move(zs), std::move(ws), intensity);
    } else if (table) {
      pr.marks = MarkSpace::interval(as_list(*table, "[noise] marks_density_table"), intensity);
    } else if (intensity > 0.0) {
      throw ConfigError("[noise]: lambda > 0 needs marks or marks_density_table");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[noise] marks: ") + e.what());
  }
  const auto dw = static_cast<Eigen::Index>(pr.wiener_dim);

  // [coefficients]
  auto component = [&](const char* key, bool diffusion) {
    const ConfigValue* v = get("coefficients", key);
    if (!v) return make_zero(d, diffusion ? dw : 1);
    try {
      return build_field(*v, diffusion, d, dw, where("coefficients", key));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where("coefficients", key) + ": " + e.what());
    }
  };
  pr.coefficients.drift = component("f", false);
  pr.coefficients.diffusion = component("B", true);
  pr.coefficients.jump = component("G", false);
  if (get("coefficients", "G1") || get("coefficients", "G2")) {
    if (!get("coefficients", "G1") || !get("coefficients", "G2")) {
      throw ConfigError("[coefficients]: a split needs both G1 and G2");
    }
    pr.coefficients.jump_split = std::make_pair(component("G1", false), component("G2", false));
  }
  pr.op = SpectralOperator(spectrum);

  // [initial]
  pr.u0 = get("initial", "u0") ? as_vector(*get("initial", "u0"), d, "[initial] u0") : StateVector::Zero(d);

  // [norms]
  if (const auto* v = get("norms", "p")) cfg.p = as_positive(*v, "[norms] p");
  if (const auto* v = get("norms", "q")) cfg.q = as_positive(*v, "[norms] q");
  if (const auto* v = get("norms", "window")) {
    const auto w = as_list(*v, "[norms] window");
    if (w.size() != 2 || !(w[0] >= 0.0) || !(w[0] <= w[1]) || w[1] > pr.horizon) {
      throw ConfigError("[norms] window: expected (t0, t1) with 0 <= t0 <= t1 <= T");
    }
    cfg.window = Window{w[0], w[1]};
  }
  if (const auto* v = get("norms", "deltas")) cfg.deltas = as_list(*v, "[norms] deltas");

  // [verify]
  VerifySettings& vs = cfg.verify;
  if (const auto* v = get("verify", "epsilons")) vs.epsilons = as_list(*v, "[verify] epsilons");
  for (std::size_t k = 0; k < vs.epsilons.size(); ++k) {
    if (!(vs.epsilons[k] > 0.0) || (k > 0 && !(vs.epsilons[k] < vs.epsilons[k - 1]))) {
      throw ConfigError("[verify] epsilons: must be positive and strictly decreasing");
    }
  }
  if (const auto* v = get("verify", "directions")) vs.directions = as_count(*v, "[verify] directions");
  if (const auto* v = get("verify", "direction_seed")) vs.direction_seed = as_seed(*v, "[verify] direction_seed");
  if (const auto* v = get("verify", "h")) vs.h = as_vector(*v, d, "[verify] h");
  if (const auto* v = get("verify", "order")) {
    vs.order = static_cast<int>(as_integer(*v, "[verify] order"));
    if (vs.order < 1 || vs.order > 5) throw ConfigError("[verify] order: must lie in 1..5");
  }
  if (const auto* v = get("verify", "order_directions")) {
    if (v->kind != ConfigValue::Kind::List || v->items.empty()) {
      throw ConfigError("[verify] order_directions: expected a list of vectors");
    }
    for (const auto& item : v->items) vs.order_directions.push_back(as_vector(item, d, "[verify] order_directions"));
  }
  if (const auto* v = get("verify", "paths")) vs.paths = as_count(*v, "[verify] paths");
  if (vs.paths == 0) throw ConfigError("[verify] paths: must be positive");
  if (const auto* v = get("verify", "pairs")) vs.pairs = as_count(*v, "[verify] pairs");
  if (const auto* v = get("verify", "pair_seed")) vs.pair_seed = as_seed(*v, "[verify] pair_seed");
  if (const auto* v = get("verify", "magnitudes")) vs.magnitudes = as_list(*v, "[verify] magnitudes");
  if (const auto* v = get("verify", "windows")) vs.windows = as_list(*v, "[verify] windows");
  if (const auto* v = get("verify", "frozen_path")) vs.frozen_path = as_seed(*v, "[verify] frozen_path");
  if (const auto* v = get("verify", "component")) {
    const std::string c = as_word(*v, "[verify] component");
    if (c == "f") vs.component = Component::Drift;
    else if (c == "B") vs.component = Component::Diffusion;
    else if (c == "G") vs.component = Component::Jump;
    else throw ConfigError("[verify] component: expected f, B or G");
  }
  if (const auto* v = get("verify", "tol_abs")) vs.tol_abs = as_double(*v, "[verify] tol_abs");
  if (const auto* v = get("verify", "band_lo")) vs.band_lo = as_double(*v, "[verify] band_lo");
  if (const auto* v = get("verify", "band_hi")) vs.band_hi = as_double(*v, "[verify] band_hi");
  vs.band_given = get("verify", "band_lo") || get("verify", "band_hi");

  cfg.plan = plan_settings(doc);

  if (const auto* v = get("output", "out")) cfg.out = as_word(*v, "[output] out");

  try {
    pr.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ConfigDocument load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

RunConfig load_config(const std::string& path) { return build_config(load_document(path)); }

}  // namespace spdesens
