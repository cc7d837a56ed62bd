#ifndef LETHARGY_CLI_IO_HPP
#define LETHARGY_CLI_IO_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lethargy/distance_engine.hpp"
#include "lethargy/error.hpp"
#include "lethargy/functional_factory.hpp"
#include "lethargy/lethargy_constructor.hpp"
#include "lethargy/normed_space.hpp"
#include "lethargy/oracle.hpp"
#include "lethargy/subspace.hpp"
#include "lethargy/subspace_chain.hpp"

namespace lethargy::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Problem files

struct ChainSpec {
  std::string mode = "random";            ///< "explicit" or "random"
  std::vector<Eigen::MatrixXd> bases;     ///< explicit: columns span Y_k
  std::vector<std::size_t> dims;          ///< random
  std::uint64_t seed = 0;                 ///< random
};

struct ToleranceSpec {
  std::optional<double> solve;
  std::optional<double> root;
  std::optional<double> verify;
};

struct ProblemSpec {
  std::size_t dim = 0;
  double p = 2.0;
  std::vector<double> weights;
  ChainSpec chain;
  std::vector<double> targets;
  ToleranceSpec tolerances;
  bool transcript = false;
  std::optional<std::vector<double>> x;          ///< candidate for verify
  std::optional<std::vector<double>> functional; ///< coefficients for james

  std::size_t links() const {
    return chain.mode == "explicit" ? chain.bases.size() : chain.dims.size();
  }
};

struct FieldError {
  std::string field;
  std::string message;
};

/// Syntax or semantic errors of a problem file.
class ParseError : public InvalidArgument {
public:
  explicit ParseError(std::vector<FieldError> errs)
      : InvalidArgument(render(errs)), errors(std::move(errs)) {}
  ParseError(const std::string &field, const std::string &message)
      : ParseError(std::vector<FieldError>{{field, message}}) {}
  std::vector<FieldError> errors;

private:
  static std::string render(const std::vector<FieldError> &errs) {
    std::string s;
    for (const auto &e : errs) {
      if (!s.empty())
        s += "; ";
      s += e.field.empty() ? e.message : e.field + ": " + e.message;
    }
    return s;
  }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                       std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline bool is_number(const Json &j) { return j.is_number(); }

class Reader {
public:
  std::vector<FieldError> errors;

  void fail(const std::string &field, const std::string &msg) {
    errors.push_back({field, msg});
  }

  std::optional<double> number(const Json &j, const std::string &field) {
    if (!j.is_number()) {
      fail(field, "expected a number");
      return std::nullopt;
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      fail(field, "expected a finite number");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::vector<double>> vector(const Json &j, const std::string &field) {
    if (!j.is_array()) {
      fail(field, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto v = number(j[i], field + "[" + std::to_string(i) + "]");
      if (!v)
        return std::nullopt;
      out.push_back(*v);
    }
    return out;
  }

  std::optional<std::size_t> count(const Json &j, const std::string &field) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
      fail(field, "expected a nonnegative integer");
      return std::nullopt;
    }
    return static_cast<std::size_t>(j.get<long long>());
  }
};

} // namespace detail

/// Parses and validates a problem file. Throws ParseError listing every
/// field-level problem found.
inline ProblemSpec parse_problem(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error &e) {
    const std::size_t off = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = detail::line_column(text, off);
    throw ParseError("", "syntax error at line " + std::to_string(line) + ", column " +
                               std::to_string(col));
  }
  detail::Reader rd;
  ProblemSpec spec;
  if (!doc.is_object())
    throw ParseError("", "top level must be an object");

  // space
  if (!doc.contains("space") || !doc["space"].is_object()) {
    rd.fail("space", "missing object");
  } else {
    const Json &sp = doc["space"];
    if (!sp.contains("dim"))
      rd.fail("space.dim", "missing");
    else if (auto d = rd.count(sp["dim"], "space.dim")) {
      if (*d == 0)
        rd.fail("space.dim", "must be positive");
      spec.dim = *d;
    }
    if (!sp.contains("norm") || !sp["norm"].is_object()) {
      rd.fail("space.norm", "missing object");
    } else {
      const Json &nm = sp["norm"];
      if (!nm.contains("p")) {
        rd.fail("space.norm.p", "missing");
      } else if (nm["p"].is_string()) {
        if (nm["p"].get<std::string>() == "inf")
          spec.p = kInf;
        else
          rd.fail("space.norm.p", "p must be ≥ 1 or inf");
      } else if (nm["p"].is_number()) {
        spec.p = nm["p"].get<double>();
        if (!(spec.p >= 1.0) || !std::isfinite(spec.p))
          rd.fail("space.norm.p", "p must be ≥ 1 or inf");
      } else {
        rd.fail("space.norm.p", "p must be ≥ 1 or inf");
      }
      if (nm.contains("weights") && !nm["weights"].is_null()) {
        if (auto w = rd.vector(nm["weights"], "space.norm.weights")) {
          spec.weights = *w;
          for (double v : spec.weights)
            if (!(v > 0.0)) {
              rd.fail("space.norm.weights", "weights must be strictly positive");
              break;
            }
          if (spec.dim > 0 && spec.weights.size() != spec.dim)
            rd.fail("space.norm.weights", "length differs from space.dim");
        }
      }
    }
  }

  // chain
  if (!doc.contains("chain") || !doc["chain"].is_object()) {
    rd.fail("chain", "missing object");
  } else {
    const Json &ch = doc["chain"];
    if (!ch.contains("mode") || !ch["mode"].is_string()) {
      rd.fail("chain.mode", "expected \"explicit\" or \"random\"");
    } else {
      spec.chain.mode = ch["mode"].get<std::string>();
      if (spec.chain.mode == "random") {
        if (!ch.contains("dims") || !ch["dims"].is_array() || ch["dims"].empty()) {
          rd.fail("chain.dims", "expected a nonempty array of integers");
        } else {
          for (std::size_t i = 0; i < ch["dims"].size(); ++i)
            if (auto k = rd.count(ch["dims"][i], "chain.dims[" + std::to_string(i) + "]"))
              spec.chain.dims.push_back(*k);
          for (std::size_t i = 1; i < spec.chain.dims.size(); ++i)
            if (spec.chain.dims[i] <= spec.chain.dims[i - 1]) {
              rd.fail("chain.dims", "dimensions must strictly increase");
              break;
            }
          if (!spec.chain.dims.empty() && spec.dim > 0 && spec.chain.dims.back() > spec.dim)
            rd.fail("chain.dims", "dimension exceeds space.dim");
        }
        if (!ch.contains("seed") || !ch["seed"].is_number_unsigned())
          rd.fail("chain.seed", "expected a nonnegative integer");
        else
          spec.chain.seed = ch["seed"].get<std::uint64_t>();
      } else if (spec.chain.mode == "explicit") {
        if (!ch.contains("bases") || !ch["bases"].is_array() || ch["bases"].empty()) {
          rd.fail("chain.bases", "expected a nonempty array of bases");
        } else {
          for (std::size_t k = 0; k < ch["bases"].size(); ++k) {
            const std::string f = "chain.bases[" + std::to_string(k) + "]";
            const Json &b = ch["bases"][k];
            if (!b.is_array()) {
              rd.fail(f, "expected an array of vectors");
              continue;
            }
            Eigen::MatrixXd m(static_cast<Eigen::Index>(spec.dim),
                              static_cast<Eigen::Index>(b.size()));
            bool ok = true;
            for (std::size_t c = 0; c < b.size() && ok; ++c) {
              auto v = rd.vector(b[c], f + "[" + std::to_string(c) + "]");
              if (!v || v->size() != spec.dim) {
                if (v)
                  rd.fail(f + "[" + std::to_string(c) + "]", "length differs from space.dim");
                ok = false;
                break;
              }
              for (std::size_t i = 0; i < spec.dim; ++i)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = (*v)[i];
            }
            if (ok)
              spec.chain.bases.push_back(std::move(m));
          }
        }
      } else {
        rd.fail("chain.mode", "expected \"explicit\" or \"random\"");
      }
    }
  }

  // targets
  if (!doc.contains("targets")) {
    rd.fail("targets", "missing");
  } else if (auto t = rd.vector(doc["targets"], "targets")) {
    spec.targets = *t;
    bool nonneg = true, mono = true;
    for (std::size_t i = 0; i < spec.targets.size(); ++i) {
      nonneg = nonneg && spec.targets[i] >= 0.0;
      mono = mono && (i == 0 || spec.targets[i] <= spec.targets[i - 1]);
    }
    if (spec.targets.empty())
      rd.fail("targets", "must be nonempty");
    if (!nonneg)
      rd.fail("targets", "targets must be nonnegative");
    if (!mono)
      rd.fail("targets", "targets not non-increasing");
    if (rd.errors.empty() && spec.targets.size() != spec.links())
      rd.fail("targets", "length differs from the number of chain links");
  }

  // tolerances
  if (doc.contains("tolerances") && !doc["tolerances"].is_null()) {
    const Json &tj = doc["tolerances"];
    if (!tj.is_object()) {
      rd.fail("tolerances", "expected an object");
    } else {
      auto one = [&](const char *key, std::optional<double> &slot) {
        if (!tj.contains(key) || tj[key].is_null())
          return;
        const std::string f = std::string("tolerances.") + key;
        if (auto v = rd.number(tj[key], f)) {
          if (!(*v > 0.0))
            rd.fail(f, "must be positive");
          slot = *v;
        }
      };
      one("solve", spec.tolerances.solve);
      one("root", spec.tolerances.root);
      one("verify", spec.tolerances.verify);
    }
  }

  // options
  if (doc.contains("options") && !doc["options"].is_null()) {
    const Json &oj = doc["options"];
    if (!oj.is_object())
      rd.fail("options", "expected an object");
    else if (oj.contains("transcript")) {
      if (!oj["transcript"].is_boolean())
        rd.fail("options.transcript", "expected a boolean");
      else
        spec.transcript = oj["transcript"].get<bool>();
    }
  }

  auto point = [&](const char *key, std::optional<std::vector<double>> &slot) {
    if (!doc.contains(key) || doc[key].is_null())
      return;
    if (auto v = rd.vector(doc[key], key)) {
      if (spec.dim > 0 && v->size() != spec.dim)
        rd.fail(key, "length differs from space.dim");
      slot = *v;
    }
  };
  point("x", spec.x);
  point("functional", spec.functional);

  if (!rd.errors.empty())
    throw ParseError(std::move(rd.errors));
  return spec;
}

inline ProblemSpec load_problem(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

// ---------------------------------------------------------------------------
// Serialisation

/// Canonical text: two-space indentation, doubles with 17 significant
/// digits, integers verbatim, non-finite doubles as strings.
inline void dump_canonical(const Json &j, std::string &out, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
  case Json::value_t::object: {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first)
        out += ",\n";
      first = false;
      out += pad + Json(it.key()).dump() + ": ";
      dump_canonical(it.value(), out, indent + 2);
    }
    out += "\n" + close + "}";
    return;
  }
  case Json::value_t::array: {
    if (j.empty()) {
      out += "[]";
      return;
    }
    bool flat = true;
    for (const auto &e : j)
      flat = flat && e.is_primitive();
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i)
          out += ", ";
        dump_canonical(j[i], out, indent + 2);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i)
        out += ",\n";
      out += pad;
      dump_canonical(j[i], out, indent + 2);
    }
    out += "\n" + close + "]";
    return;
  }
  case Json::value_t::number_float: {
    const double v = j.get<double>();
    if (std::isnan(v))
      out += "\"nan\"";
    else if (std::isinf(v))
      out += v > 0 ? "\"inf\"" : "\"-inf\"";
    else {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string s(buf);
      if (s.find_first_of(".eEn") == std::string::npos)
        s += ".0";
      out += s;
    }
    return;
  }
  default:
    out += j.dump();
  }
}

inline std::string canonical(const Json &j) {
  std::string s;
  dump_canonical(j, s);
  s += "\n";
  return s;
}

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json to_json(const Eigen::VectorXd &v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

inline Json to_json(const std::vector<double> &v) {
  Json a = Json::array();
  for (double d : v)
    a.push_back(d);
  return a;
}

inline Json problem_json(const ProblemSpec &s) {
  Json j;
  Json norm;
  if (std::isinf(s.p))
    norm["p"] = "inf";
  else
    norm["p"] = s.p;
  if (!s.weights.empty())
    norm["weights"] = to_json(s.weights);
  j["space"] = {{"dim", s.dim}, {"norm", norm}};
  Json ch;
  ch["mode"] = s.chain.mode;
  if (s.chain.mode == "explicit") {
    Json bases = Json::array();
    for (const auto &b : s.chain.bases) {
      Json cols = Json::array();
      for (Eigen::Index c = 0; c < b.cols(); ++c)
        cols.push_back(to_json(Eigen::VectorXd(b.col(c))));
      bases.push_back(cols);
    }
    ch["bases"] = bases;
  } else {
    ch["dims"] = s.chain.dims;
    ch["seed"] = s.chain.seed;
  }
  j["chain"] = ch;
  j["targets"] = to_json(s.targets);
  Json tol = Json::object();
  if (s.tolerances.solve)
    tol["solve"] = *s.tolerances.solve;
  if (s.tolerances.root)
    tol["root"] = *s.tolerances.root;
  if (s.tolerances.verify)
    tol["verify"] = *s.tolerances.verify;
  if (!tol.empty())
    j["tolerances"] = tol;
  j["options"] = {{"transcript", s.transcript}};
  if (s.x)
    j["x"] = to_json(*s.x);
  if (s.functional)
    j["functional"] = to_json(*s.functional);
  return j;
}

inline std::string emit_problem(const ProblemSpec &s) { return canonical(problem_json(s)); }

inline bool same_spec(const ProblemSpec &a, const ProblemSpec &b) {
  return emit_problem(a) == emit_problem(b);
}

// ---------------------------------------------------------------------------
// Instantiation

inline NormSpec make_space(const ProblemSpec &s) { return NormSpec(s.p, s.weights); }

inline Chain make_chain(const ProblemSpec &s) {
  if (s.chain.mode == "explicit")
    return explicit_chain(s.dim, s.chain.bases);
  // Dimension 0 links are the zero subspace.
  std::vector<std::size_t> pos;
  for (std::size_t k : s.chain.dims)
    if (k > 0)
      pos.push_back(k);
  Chain c;
  c.ambient_dim = s.dim;
  if (!s.chain.dims.empty() && s.chain.dims.front() == 0)
    c.spaces.push_back(Subspace::zero(s.dim));
  if (!pos.empty())
    for (auto &y : random_chain(s.dim, pos, s.chain.seed).spaces)
      c.spaces.push_back(std::move(y));
  return c;
}

/// Command-line overrides and subcommand parameters.
struct Flags {
  std::optional<double> tol_solve;
  std::optional<double> tol_root;
  std::optional<double> tol_verify;
  std::optional<std::uint64_t> seed;
  bool transcript = false;
  std::string out;
  // gen
  std::vector<std::size_t> dims;
  std::size_t dim = 0;
  std::optional<double> p;
  std::vector<double> targets;
  // audit
  std::string lemma;
  std::size_t trials = 100;
  // cauchy
  std::size_t n_min = 1;
  std::size_t n_max = 0;
};

inline Tolerances make_tolerances(const ProblemSpec &s, const Flags &f) {
  Tolerances t;
  t.solve = f.tol_solve ? f.tol_solve : s.tolerances.solve;
  if (s.tolerances.root)
    t.root = *s.tolerances.root;
  if (f.tol_root)
    t.root = *f.tol_root;
  if (s.tolerances.verify)
    t.verify = *s.tolerances.verify;
  if (f.tol_verify)
    t.verify = *f.tol_verify;
  return t;
}

// ---------------------------------------------------------------------------
// Reports

struct Report {
  Json doc;          ///< machine-readable body (no timestamp)
  std::string table; ///< aligned text rendering
  bool pass = false;
  int exit_code = 0;
};

/// Report text with the hash of the body and a trailing timestamp. The hash
/// covers everything except the timestamp.
inline std::string render_report(const Report &r, bool with_timestamp = true) {
  Json j = r.doc;
  j["report_hash"] = fnv1a(canonical(r.doc));
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["timestamp"] = buf;
  }
  return canonical(j);
}

/// Drops the timestamp line of a rendered report.
inline std::string strip_timestamp(const std::string &text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos)
      out += line + "\n";
  return out;
}

namespace detail {

inline std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

inline std::string residual_table_text(const std::vector<Residual> &rows, double tol) {
  std::ostringstream os;
  os << std::left << std::setw(4) << "k" << std::right << std::setw(16) << "d_k"
     << std::setw(16) << "rho" << std::setw(14) << "residual" << "  pass\n";
  for (const auto &r : rows)
    os << std::left << std::setw(4) << r.k << std::right << std::setw(16) << fmt(r.d, 10)
       << std::setw(16) << fmt(r.rho, 10) << std::setw(14) << fmt(r.residual, 3) << "  "
       << (r.pass ? "yes" : "NO <--") << "\n";
  os << "tolerance " << fmt(tol, 3) << "\n";
  return os.str();
}

inline Json residuals_json(const std::vector<Residual> &rows) {
  Json a = Json::array();
  for (const auto &r : rows)
    a.push_back({{"k", r.k}, {"d", r.d}, {"rho", r.rho}, {"residual", r.residual},
                 {"pass", r.pass}});
  return a;
}

inline Json checks_json(const std::vector<Check> &cs) {
  Json a = Json::array();
  for (const auto &c : cs)
    a.push_back({{"name", c.name}, {"j", c.j}, {"n", c.n}, {"value", c.value},
                 {"bound", c.bound}, {"ok", c.ok}});
  return a;
}

inline Json two_point_json(const TwoPointResult &r) {
  return {{"delta", r.delta},
          {"target_value", r.target_value},
          {"rho_x1", r.rho_x1},
          {"norm_bound", r.norm_bound},
          {"achieved_dual_norm", r.achieved_dual_norm},
          {"feasible_at_norm", r.feasible_at_norm},
          {"mirrored", r.mirrored},
          {"minimisers", {r.search.lo, r.search.hi}},
          {"coefficients", to_json(r.f.coeffs)}};
}

inline Json transcript_json(const ConstructionTranscript &t) {
  Json j;
  j["branch"] = t.branch;
  j["n"] = t.n;
  j["d"] = to_json(t.d);
  j["tau"] = to_json(t.tau);
  Json levels = Json::array();
  for (const auto &L : t.levels)
    levels.push_back({{"j", L.j},
                      {"alpha", L.alpha},
                      {"rho_w", L.rho_w},
                      {"delta", L.delta},
                      {"delta_max", L.delta_max},
                      {"delta_from_crossing", L.delta_from_crossing},
                      {"f_of_z", L.f_of_z},
                      {"z", to_json(L.z)},
                      {"w", to_json(L.w)},
                      {"functional", two_point_json(L.two_point)}});
  j["levels"] = levels;
  Json q = Json::array();
  for (const auto &v : t.q)
    q.push_back(to_json(v));
  j["q"] = q;
  j["u"] = to_json(t.u);
  Json fs = Json::array();
  for (const auto &r : t.functionals) {
    Json fj = {{"j", r.j},
               {"n", r.n},
               {"at_q_j", r.at_q_j},
               {"at_q_next", r.at_q_next},
               {"left_target", r.left_target},
               {"window", {r.window_lo, r.window_hi}},
               {"chosen", two_point_json(r.chosen)}};
    if (r.alternative)
      fj["alternative"] = two_point_json(*r.alternative);
    fs.push_back(fj);
  }
  j["functionals"] = fs;
  Json sw = Json::array();
  for (const auto &s : t.sweep)
    sw.push_back({{"k", s.k},
                  {"target", s.target},
                  {"h0", s.h0},
                  {"endpoint_general", s.endpoint_general},
                  {"endpoint_last", s.endpoint_last},
                  {"bracket", {s.lo, s.hi}},
                  {"lambda", s.lambda},
                  {"widenings", s.widenings},
                  {"fallback", s.fallback},
                  {"adapted_q", s.adapted_q},
                  {"finite_lemma", s.finite_lemma}});
  j["sweep"] = sw;
  j["lambdas"] = to_json(t.lambdas);
  j["checks"] = checks_json(t.checks);
  j["warnings"] = t.warnings;
  if (t.patch)
    j["patch"] = {{"lambda", t.patch->lambda},
                  {"norm_x", t.patch->norm_x},
                  {"norm_bound_ok", t.patch->norm_bound_ok},
                  {"membership_residual", t.patch->membership_residual}};
  if (t.inner)
    j["inner"] = transcript_json(*t.inner);
  return j;
}

inline std::vector<double> parse_list(const std::string &s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(std::stod(item));
  return out;
}

inline Report finalize(Report r, bool pass) {
  r.pass = pass;
  r.exit_code = pass ? 0 : 1;
  r.doc["pass"] = pass;
  return r;
}

inline Report begin(const std::string &cmd, const ProblemSpec *spec) {
  Report r;
  r.doc["command"] = cmd;
  if (spec)
    r.doc["problem_hash"] = fnv1a(emit_problem(*spec));
  return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline const std::vector<std::string> &subcommands() {
  static const std::vector<std::string> names{"construct", "verify", "witness",
                                              "finite",    "qseq",   "james",
                                              "cauchy",    "gen",    "audit"};
  return names;
}

/// Random problem file: random chain with the given dims and geometric
/// targets 2^-k unless targets are supplied.
inline ProblemSpec generate_problem(const Flags &f) {
  if (f.dims.empty() || f.dim == 0)
    throw InvalidArgument("gen needs --dims and --dim");
  ProblemSpec s;
  s.dim = f.dim;
  s.p = f.p.value_or(2.0);
  s.chain.mode = "random";
  s.chain.dims = f.dims;
  s.chain.seed = f.seed.value_or(0);
  if (!f.targets.empty()) {
    s.targets = f.targets;
  } else {
    for (std::size_t k = 1; k <= f.dims.size(); ++k)
      s.targets.push_back(std::ldexp(1.0, -static_cast<int>(k)));
  }
  // Validate through the parser.
  return parse_problem(emit_problem(s));
}

inline Report run_construct(const ProblemSpec &spec, const Flags &f) {
  Report r = detail::begin("construct", &spec);
  const NormSpec space = make_space(spec);
  const Chain chain = make_chain(spec);
  ConstructionConfig cfg;
  cfg.tol = make_tolerances(spec, f);
  const bool tr = spec.transcript || f.transcript;
  cfg.transcript = tr;
  const ConstructionResult res = theorem_construct(space, chain, spec.targets, cfg);
  const double vt = cfg.tol.verify * (1.0 + spec.targets[0]);
  r.doc["verify_tolerance"] = vt;
  r.doc["branch"] = res.transcript.branch;
  r.doc["x"] = to_json(res.x);
  r.doc["residuals"] = detail::residuals_json(res.residuals);
  r.doc["max_residual"] = res.max_residual;
  r.doc["warnings"] = res.transcript.warnings;
  if (tr)
    r.doc["transcript"] = detail::transcript_json(res.transcript);
  r.table = "construct  " + space.describe() + "  branch " + res.transcript.branch + "\n" +
            detail::residual_table_text(res.residuals, vt);
  return detail::finalize(std::move(r), res.pass);
}

inline Report run_verify(const ProblemSpec &spec, const Flags &f) {
  if (!spec.x)
    throw InvalidArgument("verify needs an \"x\" field in the problem file");
  Report r = detail::begin("verify", &spec);
  const NormSpec space = make_space(spec);
  const Chain chain = make_chain(spec);
  const Tolerances tol = make_tolerances(spec, f);
  const Point x = Eigen::Map<const Eigen::VectorXd>(spec.x->data(),
                                                    static_cast<Eigen::Index>(spec.x->size()));
  const double vt = tol.verify * (1.0 + spec.targets[0]);
  const VerifyReport v = verify_construction(space, chain, x, spec.targets, vt, tol);
  std::vector<Residual> rows;
  Json arr = Json::array();
  for (const auto &row : v.rows) {
    rows.push_back({row.k, row.d, row.rho, row.residual, row.pass});
    Json rj = {{"k", row.k}, {"d", row.d}, {"rho", row.rho}, {"residual", row.residual},
               {"pass", row.pass}};
    if (row.oracle)
      rj["oracle"] = *row.oracle;
    arr.push_back(rj);
  }
  r.doc["verify_tolerance"] = vt;
  r.doc["x"] = to_json(x);
  r.doc["residuals"] = arr;
  r.doc["oracle_consistent"] = v.oracle_consistent;
  r.doc["warnings"] = Json::array();
  if (!v.oracle_consistent)
    r.doc["warnings"].push_back("brute-force spot check disagrees with the solver");
  r.table = "verify  " + space.describe() + "\n" + detail::residual_table_text(rows, vt);
  return detail::finalize(std::move(r), v.pass);
}

inline Report run_witness(const ProblemSpec &spec, const Flags &f) {
  Report r = detail::begin("witness", &spec);
  const NormSpec space = make_space(spec);
  const Chain chain = make_chain(spec);
  const Tolerances tol = make_tolerances(spec, f);
  Json arr = Json::array();
  std::ostringstream os;
  os << "witness  " << space.describe() << "\n"
     << std::left << std::setw(4) << "k" << std::right << std::setw(16) << "||y||"
     << std::setw(16) << "rho(y, Y_k)" << std::setw(14) << "gap" << "  pass\n";
  bool pass = true;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const Subspace hi = k + 1 < chain.size() ? chain[k + 1] : Subspace::whole(chain.ambient_dim);
    if (hi.dim() <= chain[k].dim())
      continue;
    const Point y = witness(space, chain[k], hi, std::nullopt, tol);
    const double ny = norm(space, y);
    const double rho = distance(space, chain[k], y, tol).value;
    const bool ok = std::abs(ny - rho) <= tol.verify * (1.0 + ny);
    pass = pass && ok;
    arr.push_back({{"k", k + 1}, {"y", to_json(y)}, {"norm", ny}, {"rho", rho}, {"pass", ok}});
    os << std::left << std::setw(4) << k + 1 << std::right << std::setw(16)
       << detail::fmt(ny, 10) << std::setw(16) << detail::fmt(rho, 10) << std::setw(14)
       << detail::fmt(std::abs(ny - rho), 3) << "  " << (ok ? "yes" : "NO <--") << "\n";
  }
  r.doc["witnesses"] = arr;
  r.table = os.str();
  return detail::finalize(std::move(r), pass);
}

inline Report run_finite(const ProblemSpec &spec, const Flags &f) {
  Report r = detail::begin("finite", &spec);
  const NormSpec space = make_space(spec);
  const Chain chain = make_chain(spec);
  const Tolerances tol = make_tolerances(spec, f);
  const Point z = random_matrix(spec.dim, 1, f.seed.value_or(1)).col(0);
  const FiniteResult fr = finite_construct(space, chain.spaces, spec.targets, z, tol);
  const double vt = tol.verify * (1.0 + spec.targets[0]);
  const auto rows = residual_table(space, chain, fr.x, spec.targets, vt, tol);
  bool pass = true;
  for (const auto &row : rows)
    pass = pass && row.pass;
  const double member = fr.membership_residual / (1.0 + fr.x.norm());
  pass = pass && member <= 1e-8 && fr.lambda > 0.0;
  r.doc["verify_tolerance"] = vt;
  r.doc["z"] = to_json(z);
  r.doc["x"] = to_json(fr.x);
  r.doc["lambda"] = fr.lambda;
  r.doc["norm_x"] = fr.norm_x;
  r.doc["norm_bound_ok"] = fr.norm_bound_ok;
  r.doc["membership_residual"] = fr.membership_residual;
  r.doc["residuals"] = detail::residuals_json(rows);
  r.doc["warnings"] = Json::array();
  if (!fr.norm_bound_ok)
    r.doc["warnings"].push_back("||x|| exceeds d_1 + 1 (reported, not enforced)");
  r.table = "finite  " + space.describe() + "  lambda " + detail::fmt(fr.lambda) + "\n" +
            detail::residual_table_text(rows, vt);
  return detail::finalize(std::move(r), pass);
}

/// q-sequence lemma on Q1 = Y_1, Q2 = Y_2, Q3 = Y_3 (or the whole space),
/// with u_m = 1 + d_m and v_m = 1.
inline Report run_qseq(const ProblemSpec &spec, const Flags &f) {
  Report r = detail::begin("qseq", &spec);
  const NormSpec space = make_space(spec);
  const Chain chain = make_chain(spec);
  if (chain.size() < 2)
    throw InvalidArgument("qseq needs at least two chain links");
  const Tolerances tol = make_tolerances(spec, f);
  const Subspace &q1 = chain[0];
  const Subspace &q2 = chain[1];
  const Subspace q3 = chain.size() > 2 ? chain[2] : Subspace::whole(chain.ambient_dim);
  const Point y2 = witness(space, q2, q3, std::nullopt, tol);
  auto [zw, lvl] = choose_zw(space, q1, q2, y2, tol);
  std::vector<std::pair<double, double>> pairs;
  for (double d : spec.targets)
    pairs.emplace_back(1.0 + d, 1.0);
  const QSequenceLevel L = q_sequence(space, q1, q2, zw.z, zw.w, pairs, tol);
  const double ct = 1e-6;
  std::vector<Check> checks;
  checks.push_back(lethargy::detail::eq_check("rho_z_Q1", 0, 0, distance(space, q1, zw.z, tol).value, 2.0, ct));
  checks.push_back(lethargy::detail::eq_check("rho_z_Q2", 0, 0, distance(space, q2, zw.z, tol).value, 1.0, ct));
  checks.push_back(lethargy::detail::eq_check("norm_z_minus_w", 0, 0, norm(space, zw.z - zw.w), 1.0, ct));
  checks.push_back(lethargy::detail::make_check("delta_window", 0, 0, L.delta, 3.0 / L.rho_w,
                                      L.delta >= 1.0 - ct && L.delta <= 3.0 / L.rho_w + ct));
  checks.push_back(lethargy::detail::le_check("functional_norm", 0, 0,
                                    L.two_point.achieved_dual_norm * L.rho_w, 1.0, ct));
  Json entries = Json::array();
  for (std::size_t m = 0; m < L.entries.size(); ++m) {
    const QEntry &e = L.entries[m];
    const int mm = static_cast<int>(m + 1);
    checks.push_back(lethargy::detail::eq_check("rho_q_Q1", mm, 0, distance(space, q1, e.q, tol).value, e.u, ct));
    checks.push_back(lethargy::detail::eq_check("rho_q_Q2", mm, 0, distance(space, q2, e.q, tol).value, e.v, ct));
    checks.push_back(lethargy::detail::make_check("mu_range", mm, 0, e.mu, e.u,
                                        e.mu >= e.v - ct && e.mu <= e.u + ct));
    entries.push_back({{"u", e.u}, {"v", e.v}, {"mu", e.mu}, {"expanded", e.expanded},
                       {"q", to_json(e.q)}});
  }
  const double c = norm(space, zw.z) + 2.0;
  for (std::size_t a = 0; a < L.entries.size(); ++a)
    for (std::size_t b = a + 1; b < L.entries.size(); ++b) {
      const auto &ea = L.entries[a];
      const auto &eb = L.entries[b];
      checks.push_back(lethargy::detail::le_check("difference_bound", static_cast<int>(a + 1),
                                        static_cast<int>(b + 1), norm(space, ea.q - eb.q),
                                        c * (std::max(ea.u, eb.u) - std::min(ea.v, eb.v)), ct));
    }
  bool pass = true;
  std::ostringstream os;
  os << "qseq  " << space.describe() << "  delta " << detail::fmt(L.delta) << "\n";
  for (const auto &ch : checks) {
    pass = pass && ch.ok;
    os << std::left << std::setw(18) << ch.name << std::right << std::setw(4) << ch.j
       << std::setw(4) << ch.n << std::setw(16) << detail::fmt(ch.value, 10)
       << std::setw(16) << detail::fmt(ch.bound, 10) << "  " << (ch.ok ? "ok" : "FAIL") << "\n";
  }
  r.doc["z"] = to_json(zw.z);
  r.doc["w"] = to_json(zw.w);
  r.doc["delta"] = L.delta;
  r.doc["functional"] = detail::two_point_json(L.two_point);
  r.doc["entries"] = entries;
  r.doc["checks"] = detail::checks_json(checks);
  r.doc["warnings"] = L.warnings;
  r.table = os.str();
  return detail::finalize(std::move(r), pass);
}

inline Report run_james(const ProblemSpec &spec, const Flags &f) {
  Report r = detail::begin("james", &spec);
  const NormSpec space = make_space(spec);
  ConstructionConfig cfg;
  cfg.tol = make_tolerances(spec, f);
  cfg.transcript = spec.transcript || f.transcript;
  const Eigen::VectorXd fn =
      spec.functional ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                            spec.functional->data(),
                            static_cast<Eigen::Index>(spec.functional->size())))
                      : Eigen::VectorXd(random_matrix(spec.dim, 1, f.seed.value_or(1)).col(0));
  std::vector<double> tail;
  if (spec.targets.size() > 2)
    tail.assign(spec.targets.begin() + 2, spec.targets.end());
  const JamesReport jr = james_demo(space, fn, tail, cfg);
  r.doc["functional"] = to_json(fn);
  r.doc["x"] = to_json(jr.x);
  r.doc["norm_x"] = jr.norm_x;
  r.doc["f_ratio"] = jr.f_ratio;
  r.doc["rho_kernel"] = jr.rho_kernel;
  Json warns = jr.warnings;
  for (const auto &w : jr.construction.transcript.warnings)
    warns.push_back(w);
  r.doc["warnings"] = warns;
  if (cfg.transcript)
    r.doc["transcript"] = detail::transcript_json(jr.construction.transcript);
  std::ostringstream os;
  os << "james  " << space.describe() << "\n"
     << "||x||            " << detail::fmt(jr.norm_x, 12) << "\n"
     << "f(x)/||f||       " << detail::fmt(jr.f_ratio, 12) << "\n"
     << "rho(x, ker f)    " << detail::fmt(jr.rho_kernel, 12) << "\n"
     << "norm attained    " << (jr.pass ? "yes" : "NO") << "\n";
  r.table = os.str();
  return detail::finalize(std::move(r), jr.pass);
}

inline Report run_cauchy(const ProblemSpec &spec, const Flags &f) {
  Report r = detail::begin("cauchy", &spec);
  const NormSpec space = make_space(spec);
  const Chain chain = make_chain(spec);
  ConstructionConfig cfg;
  cfg.tol = make_tolerances(spec, f);
  std::size_t last = 0;
  while (last < spec.targets.size() && spec.targets[last] > 0.0)
    ++last;
  const std::size_t n_max = f.n_max > 0 ? f.n_max : last;
  const CauchyReport cr = cauchy_study(space, chain, spec.targets, f.n_min, n_max, cfg);
  const double vt = cfg.tol.verify * (1.0 + spec.targets[0]);
  bool residual_ok = true;
  for (double m : cr.max_residual)
    residual_ok = residual_ok && m <= vt;
  bool tail_ok = true;
  for (const auto &c : cr.tail)
    tail_ok = tail_ok && c.ok;
  Json gaps = Json::array();
  for (const auto &row : cr.gaps)
    gaps.push_back(to_json(row));
  r.doc["n_min"] = cr.n_min;
  r.doc["n_max"] = cr.n_max;
  r.doc["verify_tolerance"] = vt;
  r.doc["max_residual"] = to_json(cr.max_residual);
  r.doc["gaps"] = gaps;
  r.doc["tail"] = detail::checks_json(cr.tail);
  r.doc["q_difference"] = detail::checks_json(cr.q_difference);
  r.doc["warnings"] = cr.warnings;
  std::ostringstream os;
  os << "cauchy  " << space.describe() << "  n = " << cr.n_min << ".." << cr.n_max << "\n"
     << std::left << std::setw(4) << "n" << std::right << std::setw(14) << "max resid"
     << std::setw(18) << "||x_n - x_max||" << "\n";
  for (std::size_t a = 0; a < cr.x.size(); ++a)
    os << std::left << std::setw(4) << cr.n_min + a << std::right << std::setw(14)
       << detail::fmt(cr.max_residual[a], 3) << std::setw(18)
       << detail::fmt(cr.gaps[a].back(), 6) << "\n";
  os << "tail estimate " << (tail_ok ? "holds" : "FAILS") << "\n";
  r.table = os.str();
  return detail::finalize(std::move(r), residual_ok && tail_ok);
}

inline Report run_gen(const Flags &f) {
  const ProblemSpec s = generate_problem(f);
  Report r;
  r.doc = problem_json(s);
  r.table = emit_problem(s);
  r.pass = true;
  r.exit_code = 0;
  return r;
}

inline Report run_audit(const ProblemSpec *spec, const Flags &f) {
  if (f.lemma.empty())
    throw InvalidArgument("audit needs --lemma");
  Report r = detail::begin("audit", spec);
  AuditFamily fam;
  fam.p = f.p ? *f.p : spec ? spec->p : 2.0;
  if (f.lemma == "two_point_free") {
    fam.q_dim = 0;
    fam.dim_min = 2;
    fam.dim_max = 4;
  }
  const std::uint64_t seed = f.seed.value_or(1);
  const AuditReport a = lemma_audit(f.lemma, fam, f.trials, seed);
  r.doc["lemma"] = a.lemma;
  r.doc["p"] = std::isinf(fam.p) ? Json("inf") : Json(fam.p);
  r.doc["seed"] = seed;
  r.doc["trials"] = a.trials;
  r.doc["passes"] = a.passes;
  Json fails = Json::array();
  for (const auto &t : a.failures) {
    Json cfg = Json::object();
    for (const auto &[k, v] : t.config)
      cfg[k] = to_json(v);
    char seed_hex[17];
    std::snprintf(seed_hex, sizeof seed_hex, "%016llx", static_cast<unsigned long long>(t.seed));
    fails.push_back({{"seed", seed_hex}, {"detail", t.detail}, {"observed", t.observed},
                     {"claimed", t.claimed}, {"config", cfg}});
  }
  r.doc["failures"] = fails;
  std::ostringstream os;
  os << "audit  " << a.lemma << "  p=" << (std::isinf(fam.p) ? std::string("inf") : detail::fmt(fam.p))
     << "  " << a.passes << "/" << a.trials << " pass\n";
  for (std::size_t i = 0; i < a.failures.size() && i < 10; ++i)
    os << "  fail  " << a.failures[i].detail << "  observed " << detail::fmt(a.failures[i].observed)
       << "  claimed " << detail::fmt(a.failures[i].claimed) << "\n";
  r.table = os.str();
  return detail::finalize(std::move(r), a.passes == a.trials);
}

/// Dispatches a subcommand. `spec` may be null only for gen and audit.
inline Report run_subcommand(const std::string &name, const ProblemSpec *spec,
                             const Flags &f) {
  if (name == "gen")
    return run_gen(f);
  if (name == "audit")
    return run_audit(spec, f);
  bool known = false;
  for (const auto &n : subcommands())
    known = known || n == name;
  if (!known)
    throw InvalidArgument("unknown subcommand: " + name);
  if (!spec)
    throw InvalidArgument(name + " needs a problem file");
  if (name == "construct")
    return run_construct(*spec, f);
  if (name == "verify")
    return run_verify(*spec, f);
  if (name == "witness")
    return run_witness(*spec, f);
  if (name == "finite")
    return run_finite(*spec, f);
  if (name == "qseq")
    return run_qseq(*spec, f);
  if (name == "james")
    return run_james(*spec, f);
  return run_cauchy(*spec, f);
}

} // namespace lethargy::io

#endif // LETHARGY_CLI_IO_HPP
