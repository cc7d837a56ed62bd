// Command-line front end: problem file in, report file and text table out.
//
//   lethargy_cli construct problem.json --out report.json
//   lethargy_cli gen --dims 1,2,3 --dim 8 --seed 11 --out problem.json
//   lethargy_cli audit --lemma kernel_identity --p 2 --trials 100 --seed 1
//
// Exit status: 0 pass, 1 verification failure, 2 usage or parse error,
// 3 solver failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lethargy/cli_io.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kSolver = 3;

template <class T> std::vector<T> split_list(const std::string &s) {
  std::vector<T> out;
  std::string item;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      if (!item.empty()) {
        if constexpr (std::is_same_v<T, double>)
          out.push_back(std::stod(item));
        else
          out.push_back(static_cast<T>(std::stoull(item)));
      }
      item.clear();
    } else if (s[i] != ' ') {
      item += s[i];
    }
  }
  return out;
}

bool write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    return false;
  out << text;
  return static_cast<bool>(out);
}

} // namespace

int main(int argc, char **argv) {
  namespace io = lethargy::io;
  CLI::App app{"Constructive lethargy toolkit for weighted p-normed spaces"};
  app.require_subcommand(1, 1);

  io::Flags flags;
  std::string problem_path, dims_s, targets_s, p_s;
  std::optional<double> tol_solve, tol_root, tol_verify;
  std::optional<std::uint64_t> seed;

  auto common = [&](CLI::App *sub, bool needs_problem) {
    auto *opt = sub->add_option("problem", problem_path, "problem file (JSON)");
    if (needs_problem)
      opt->required()->check(CLI::ExistingFile);
    sub->add_option("--tol-solve", tol_solve, "solver tolerance");
    sub->add_option("--tol-root", tol_root, "root finding tolerance");
    sub->add_option("--tol-verify", tol_verify, "verification tolerance");
    sub->add_option("--seed", seed, "random seed");
    sub->add_flag("--transcript", flags.transcript, "include the construction transcript");
    sub->add_option("--out", flags.out, "machine-readable output path");
  };

  for (const auto &name : io::subcommands()) {
    CLI::App *sub = app.add_subcommand(name);
    common(sub, name != "gen" && name != "audit");
    if (name == "gen") {
      sub->add_option("--dims", dims_s, "comma separated subspace dimensions")->required();
      sub->add_option("--dim", flags.dim, "ambient dimension")->required();
      sub->add_option("--p", p_s, "norm exponent (number or inf)");
      sub->add_option("--targets", targets_s, "comma separated targets");
    } else if (name == "audit") {
      sub->add_option("--lemma", flags.lemma, "kernel_identity | two_point_in_context | "
                                              "two_point_free | q_sequence | finite")
          ->required();
      sub->add_option("--p", p_s, "norm exponent (number or inf)");
      sub->add_option("--trials", flags.trials, "number of trials");
    } else if (name == "cauchy") {
      sub->add_option("--n-min", flags.n_min, "smallest prefix length");
      sub->add_option("--n-max", flags.n_max, "largest prefix length");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  flags.tol_solve = tol_solve;
  flags.tol_root = tol_root;
  flags.tol_verify = tol_verify;
  flags.seed = seed;
  try {
    if (!dims_s.empty())
      flags.dims = split_list<std::size_t>(dims_s);
    if (!targets_s.empty())
      flags.targets = split_list<double>(targets_s);
    if (!p_s.empty())
      flags.p = p_s == "inf" ? lethargy::kInf : std::stod(p_s);
    if (flags.p && !(*flags.p >= 1.0)) {
      std::cerr << "error: p must be ≥ 1 or inf\n";
      return kUsage;
    }
  } catch (const std::exception &) {
    std::cerr << "error: malformed list or number argument\n";
    return kUsage;
  }

  try {
    std::optional<io::ProblemSpec> spec;
    if (!problem_path.empty())
      spec = io::load_problem(problem_path);
    const io::Report rep = io::run_subcommand(name, spec ? &*spec : nullptr, flags);
    if (name == "gen") {
      if (flags.out.empty())
        std::cout << rep.table;
      else if (!write_file(flags.out, rep.table)) {
        std::cerr << "error: cannot write " << flags.out << "\n";
        return kUsage;
      }
      return 0;
    }
    std::cout << rep.table;
    if (!flags.out.empty() && !write_file(flags.out, io::render_report(rep))) {
      std::cerr << "error: cannot write " << flags.out << "\n";
      return kUsage;
    }
    return rep.exit_code;
  } catch (const io::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const lethargy::SolverFailure &e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const lethargy::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
