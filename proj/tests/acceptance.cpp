// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lethargy/cli_io.hpp"
#include "lethargy/lethargy_constructor.hpp"
#include "lethargy/oracle.hpp"

using namespace lethargy;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string pname(double p) {
  if (std::isinf(p))
    return "inf";
  std::ostringstream os;
  os << p;
  return os.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

int failures = 0;

void report(int id, const std::string &name, const Outcome &o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail
            << std::endl;
  for (const auto &n : o.notes)
    std::cout << "       " << n << "\n";
  if (!o.pass)
    ++failures;
}

// Pinned tolerances.
constexpr double kOracleTol = 1e-4;
constexpr double kOracleSeconds = 60.0;
constexpr double kGapL2 = 1e-7;
constexpr double kGapPoly = 1e-6;
constexpr double kGapOther = 1e-5;
constexpr double kVanish = 1e-8;
constexpr double kTheoremTol = 1e-6;
constexpr double kTheoremSeconds = 10.0;
constexpr double kLemmaTol = 1e-6;
constexpr double kJamesTol = 1e-6;
constexpr std::size_t kInContextPasses = 95;

const double kNorms3[] = {1.0, 2.0, kInf};

struct Instance {
  NormSpec space;
  Subspace y;
  Point x;
};

Instance random_instance(std::mt19937_64 &rng, double p, bool weighted) {
  std::uniform_int_distribution<std::size_t> n_dist(2, 6);
  const std::size_t n = n_dist(rng);
  std::uniform_int_distribution<std::size_t> k_dist(1, std::min<std::size_t>(3, n - 1));
  const std::size_t k = k_dist(rng);
  std::vector<double> w;
  if (weighted) {
    std::uniform_real_distribution<double> wd(0.25, 4.0);
    for (std::size_t i = 0; i < n; ++i)
      w.push_back(wd(rng));
  }
  const Eigen::MatrixXd m = random_matrix(n, k + 1, rng());
  return {NormSpec(p, w), Subspace(m.leftCols(static_cast<Eigen::Index>(k))),
          2.0 * m.col(static_cast<Eigen::Index>(k))};
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t count = 0, bad = 0;
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    double worst_p = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Instance in = random_instance(rng, p, i % 2 == 1);
      const double err =
          std::abs(distance(in.space, in.y, in.x).value - brute_distance(in.space, in.y, in.x));
      worst_p = std::max(worst_p, err);
      bad += err > kOracleTol;
      ++count;
    }
    worst = std::max(worst, worst_p);
    o.notes.push_back("p=" + pname(p) + ": worst |distance - brute| " + sci(worst_p));
  }
  const double secs = seconds_since(t0);
  o.pass = bad == 0 && secs <= kOracleSeconds;
  o.detail = std::to_string(count) + " instances, " + std::to_string(bad) + " above " +
             sci(kOracleTol) + ", worst " + sci(worst) + ", " + sci(secs) + " s";
  return o;
}

Outcome certificate_duality() {
  Outcome o;
  std::mt19937_64 rng(777);
  const double ps[] = {1.0, 1.25, 1.5, 2.0, 3.0, 4.0, kInf};
  std::size_t bad = 0;
  double worst_ratio = 0.0, worst_vanish = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double p = ps[static_cast<std::size_t>(i) % 7];
    const Instance in = random_instance(rng, p, i % 3 == 0);
    const DistanceSolution d = distance(in.space, in.y, in.x);
    const double gap = std::abs(d.certificate(in.x) - d.value);
    const double lim = in.space.kind() == NormKind::L2 ? kGapL2
                       : (in.space.kind() == NormKind::General) ? kGapOther
                                                                : kGapPoly;
    const double vanish =
        (in.y.orthonormal().transpose() * d.certificate.coeffs).cwiseAbs().maxCoeff();
    worst_ratio = std::max(worst_ratio, gap / lim);
    worst_vanish = std::max(worst_vanish, vanish);
    bad += gap > lim || vanish > kVanish;
  }
  o.pass = bad == 0;
  o.detail = "500 solves, " + std::to_string(bad) + " violations, worst gap/limit " +
             sci(worst_ratio) + ", worst |f on Y| " + sci(worst_vanish);
  return o;
}

struct Profile {
  std::string name;
  std::vector<double> d;
};

std::vector<Profile> profiles() {
  std::vector<Profile> out(4);
  out[0].name = "geometric";
  out[1].name = "harmonic";
  out[2] = {"tied", {1.0, 1.0, 0.5, 0.25, 0.125, 0.0625}};
  out[3] = {"zero-tail", {1.0, 0.5, 0.0, 0.0, 0.0, 0.0}};
  for (int k = 1; k <= 6; ++k) {
    out[0].d.push_back(std::ldexp(1.0, -k));
    out[1].d.push_back(1.0 / k);
  }
  return out;
}

const std::vector<std::size_t> kTheoremDims{2, 4, 6, 8, 10, 12};
constexpr std::uint64_t kTheoremSeed = 2024;

// Transcripts from criterion 3, reused by criterion 5.
std::vector<std::pair<std::string, ConstructionTranscript>> theorem_transcripts;

Outcome theorem_end_to_end() {
  Outcome o;
  const Chain chain = random_chain(16, kTheoremDims, kTheoremSeed);
  std::size_t ok = 0, total = 0;
  double worst = 0.0, slowest = 0.0;
  for (double p : kNorms3) {
    const NormSpec sp(p);
    for (const Profile &pr : profiles()) {
      ++total;
      const std::string tag = "p=" + pname(p) + " " + pr.name;
      const auto t0 = Clock::now();
      try {
        const ConstructionResult r = theorem_construct(sp, chain, pr.d);
        const double secs = seconds_since(t0);
        double res = 0.0;
        for (std::size_t k = 0; k < chain.size(); ++k)
          res = std::max(res, std::abs(distance(sp, chain[k], r.x).value - pr.d[k]));
        const bool good = res <= kTheoremTol * (1.0 + pr.d[0]) && secs <= kTheoremSeconds;
        ok += good;
        worst = std::max(worst, res);
        slowest = std::max(slowest, secs);
        o.notes.push_back(tag + ": max residual " + sci(res) + ", " + sci(secs) + " s" +
                          (good ? "" : "  <-- fails"));
        theorem_transcripts.emplace_back(tag, r.transcript);
      } catch (const Error &e) {
        o.notes.push_back(tag + ": error: " + e.what());
      }
    }
  }
  o.pass = ok == total;
  o.detail = std::to_string(ok) + "/" + std::to_string(total) + " runs, worst residual " +
             sci(worst) + ", slowest " + sci(slowest) + " s";
  return o;
}

Outcome q_sequence_suite() {
  Outcome o;
  std::size_t passes = 0, trials = 0;
  for (double p : kNorms3) {
    AuditFamily fam;
    fam.p = p;
    const AuditReport r = lemma_audit("q_sequence", fam, 50, 4242);
    passes += r.passes;
    trials += r.trials;
    std::string note = "p=" + pname(p) + ": " + std::to_string(r.passes) + "/50";
    if (!r.failures.empty())
      note += ", first failure: " + r.failures.front().detail + " (observed " +
              sci(r.failures.front().observed) + ", bound " + sci(r.failures.front().claimed) +
              ")";
    o.notes.push_back(note);
  }
  o.pass = passes == trials;
  o.detail = std::to_string(passes) + "/" + std::to_string(trials) + " triples satisfy every "
             "conclusion at tolerance " + sci(kLemmaTol);
  return o;
}

// Cauchy studies on a 12-link chain with geometric targets, shared by 5 and 6.
struct Study {
  double p;
  std::optional<CauchyReport> report;
  std::string error;
};

std::vector<Study> studies;

const std::vector<Study> &cauchy_studies() {
  if (!studies.empty())
    return studies;
  std::vector<std::size_t> dims;
  for (std::size_t k = 1; k <= 12; ++k)
    dims.push_back(k);
  const Chain chain = random_chain(14, dims, 1212);
  std::vector<double> d;
  for (int k = 1; k <= 12; ++k)
    d.push_back(std::ldexp(1.0, -k));
  ConstructionConfig cfg;
  cfg.check_tol = kTheoremTol;
  for (double p : kNorms3) {
    Study s{p, std::nullopt, ""};
    try {
      s.report = cauchy_study(NormSpec(p), chain, d, 1, 12, cfg);
    } catch (const Error &e) {
      s.error = e.what();
    }
    studies.push_back(std::move(s));
  }
  return studies;
}

struct Tally {
  std::size_t total = 0;
  std::size_t bad = 0;
  double worst_excess = -kInf;
  void add(const Check &c) {
    ++total;
    bad += !c.ok;
    worst_excess = std::max(worst_excess, c.value - c.bound);
  }
};

Outcome transcript_bounds() {
  Outcome o;
  std::map<std::string, Tally> tallies;
  auto absorb = [&](const ConstructionTranscript &t) {
    for (const Check &c : t.checks)
      if (c.name == "lambda_last_exact" || c.name == "lambda_bound" || c.name == "f_window")
        tallies[c.name].add(c);
  };
  std::size_t runs = 0;
  for (const auto &[tag, t] : theorem_transcripts) {
    absorb(t);
    ++runs;
  }
  bool errors = false;
  for (const Study &s : cauchy_studies()) {
    if (!s.report) {
      errors = true;
      o.notes.push_back("cauchy p=" + pname(s.p) + ": error: " + s.error);
      continue;
    }
    for (const auto &t : s.report->transcripts) {
      absorb(t);
      ++runs;
    }
    for (const Check &c : s.report->q_difference)
      tallies["q_difference"].add(c);
  }
  bool ok = !errors;
  std::string summary;
  for (const auto &[name, tl] : tallies) {
    ok = ok && tl.bad == 0;
    o.notes.push_back(name + ": " + std::to_string(tl.total - tl.bad) + "/" +
                      std::to_string(tl.total) + " hold, worst value - bound " +
                      sci(tl.worst_excess));
    if (!summary.empty())
      summary += ", ";
    summary += name + " " + std::to_string(tl.bad) + " bad";
  }
  o.pass = ok && tallies.count("q_difference") && tallies.count("f_window");
  o.detail = std::to_string(runs) + " runs; " + summary;
  return o;
}

Outcome cauchy_tail() {
  Outcome o;
  std::size_t total = 0, bad = 0;
  double worst = -kInf;
  bool errors = false;
  for (const Study &s : cauchy_studies()) {
    if (!s.report) {
      errors = true;
      continue;
    }
    for (const Check &c : s.report->tail) {
      ++total;
      bad += !c.ok;
      worst = std::max(worst, c.value - c.bound);
    }
    const auto &g = s.report->gaps;
    std::string row = "p=" + pname(s.p) + " gaps ||x_n - x_12||:";
    for (std::size_t a = 0; a + 1 < g.size(); ++a)
      row += " " + sci(g[a].back());
    o.notes.push_back(row);
  }
  o.pass = !errors && bad == 0 && total > 0;
  o.detail = std::to_string(total - bad) + "/" + std::to_string(total) +
             " tail estimates hold, worst sum - d_{m-1} " + sci(worst);
  return o;
}

Outcome james() {
  Outcome o;
  std::size_t ok = 0, total = 0;
  double worst = 0.0;
  for (double p : {2.0, kInf}) {
    for (std::uint64_t i = 0; i < 20; ++i) {
      ++total;
      const Eigen::VectorXd f = random_matrix(8, 1, 8000 + i).col(0) * 3.0;
      try {
        const JamesReport r = james_demo(NormSpec(p), f, {});
        const double e = std::max(std::abs(r.norm_x - 1.0), std::abs(r.f_ratio - 1.0));
        worst = std::max(worst, e);
        ok += e <= kJamesTol;
      } catch (const Error &e) {
        o.notes.push_back("p=" + pname(p) + " functional " + std::to_string(i) +
                          ": error: " + e.what());
      }
    }
  }
  o.pass = ok == total;
  o.detail = std::to_string(ok) + "/" + std::to_string(total) +
             " functionals attain their norm, worst deviation " + sci(worst);
  return o;
}

Outcome lemma_audits() {
  Outcome o;
  AuditFamily fam;
  fam.p = 2.0;
  const AuditReport kernel = lemma_audit("kernel_identity", fam, 100, 1);
  o.notes.push_back("kernel_identity p=2: " + std::to_string(kernel.passes) + "/100");

  bool in_context_ok = true;
  std::string ctx;
  for (double p : kNorms3) {
    AuditFamily f;
    f.p = p;
    const AuditReport r = lemma_audit("two_point_in_context", f, 100, 1);
    in_context_ok = in_context_ok && r.passes >= kInContextPasses;
    o.notes.push_back("two_point_in_context p=" + pname(p) + ": " + std::to_string(r.passes) +
                      "/100");
    ctx += (ctx.empty() ? "" : ", ") + std::to_string(r.passes);
  }

  AuditFamily free_fam;
  free_fam.p = 2.0;
  free_fam.q_dim = 0;
  const AuditReport a = lemma_audit("two_point_free", free_fam, 100, 1);
  const AuditReport b = lemma_audit("two_point_free", free_fam, 100, 1);
  bool documented = false;
  if (!a.failures.empty() && !b.failures.empty()) {
    const AuditTrial &t = a.failures.front();
    const AuditTrial again = audit_trial("two_point_free", free_fam, t.seed, 0);
    const std::vector<double> e1{1.0, 0.0}, e2{0.0, 1.0};
    bool cfg = false;
    for (const auto &[k, v] : t.config)
      cfg = cfg || (k == "x1" && v == e1);
    documented = t.seed == audit_trial_seed(1, 0) && cfg &&
                 std::abs(t.observed - std::sqrt(2.0)) <= 1e-9 &&
                 std::abs(t.claimed - 1.0) <= 1e-12 && again.config == t.config &&
                 again.observed == t.observed && b.failures.front().seed == t.seed;
  }
  o.notes.push_back("two_point_free p=2: " + std::to_string(a.passes) + "/100 feasible; " +
                    (documented ? "x1=e1, x2=e2, delta=0 reproduced from seed with norm "
                                  "sqrt(2) > 1"
                                : "documented configuration not reproduced"));
  o.pass = kernel.passes == 100 && in_context_ok && documented;
  o.detail = "kernel " + std::to_string(kernel.passes) + "/100, in-context for p=1, 2, inf: " + ctx +
             " of 100 (need " + std::to_string(kInContextPasses) + "), documented free failure " +
             (documented ? "reproduced" : "missing");
  return o;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("lethargy_acc_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string sample = std::string(LETHARGY_SAMPLES_DIR) + "/minimal.json";
  std::vector<std::string> reports;
  int rc_all = 0;
  for (int run = 0; run < 2; ++run) {
    const fs::path out = dir / ("report" + std::to_string(run) + ".json");
    const std::string cmd = std::string("\"") + LETHARGY_CLI_PATH + "\" construct \"" + sample +
                            "\" --seed 7 --transcript --out \"" + out.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    rc_all |= rc;
    reports.push_back(slurp(out));
  }
  fs::remove_all(dir);
  const bool same = !reports[0].empty() &&
                    io::strip_timestamp(reports[0]) == io::strip_timestamp(reports[1]);
  o.pass = rc_all == 0 && same;
  o.detail = std::string("two construct runs ") + (same ? "identical" : "differ") +
             " excluding timestamp, " + std::to_string(reports[0].size()) + " bytes, exit " +
             (rc_all == 0 ? "0" : "nonzero");
  return o;
}

void run(int id, const std::string &name, const std::function<Outcome()> &f) {
  try {
    report(id, name, f());
  } catch (const std::exception &e) {
    report(id, name, Outcome{false, std::string("uncaught error: ") + e.what(), {}});
  }
}

} // namespace

int main() {
  run(1, "oracle equivalence", oracle_equivalence);
  run(2, "certificate duality", certificate_duality);
  run(3, "main theorem end-to-end", theorem_end_to_end);
  run(4, "q-sequence lemma suite", q_sequence_suite);
  run(5, "transcript bounds", transcript_bounds);
  run(6, "cauchy tail estimate", cauchy_tail);
  run(7, "norm attainment demo", james);
  run(8, "lemma audits", lemma_audits);
  run(9, "cli determinism", cli_determinism);
  std::cout << (9 - failures) << "/9 criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
