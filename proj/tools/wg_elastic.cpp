// wg-elastic: convergence studies and property checks from the command line.
//
//   wg-elastic study --example 4 --family a --k 2 --levels 1..4 [--policy k+2] [--out DIR] [--vtk]
//   wg-elastic verify [--k 2] [--family b]
//   wg-elastic mesh --family b --n 4 --layout square --out mesh.vtk
//
// `--config FILE` reads flat `key = value` lines (same names as the long
// flags, `#` starts a comment); flags given on the command line win.

#include <CLI11.hpp>

#include <wgelast/verify.hpp>
#include <wgelast/wgelast.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

using namespace wgelast;

namespace {

GridFamily parse_family(const std::string& s) {
  if (s == "a" || s == "A") return GridFamily::A;
  if (s == "b" || s == "B") return GridFamily::B;
  throw CLI::ValidationError("--family", "expected a or b");
}

std::pair<int, int> parse_levels(const std::string& s) {
  static const std::regex re(R"((\d+)(?:\.\.(\d+))?)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw CLI::ValidationError("--levels", "expected L0..L1");
  const int a = std::stoi(m[1]);
  const int b = m[2].matched ? std::stoi(m[2]) : a;
  if (a < 1 || b < a) throw CLI::ValidationError("--levels", "need 1 <= L0 <= L1");
  return {a, b};
}

// Expand `--config FILE` into `--key value` pairs placed before the other
// arguments of the same subcommand, so explicit flags override them.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> in(argv + 1, argv + argc), out;
  std::vector<std::string> cfg;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == "--config" && i + 1 < in.size()) {
      std::ifstream f(in[i + 1]);
      if (!f) throw std::runtime_error("cannot read config file " + in[i + 1]);
      std::string line;
      while (std::getline(f, line)) {
        line = line.substr(0, line.find('#'));
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
          const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
          return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        if (val == "true" || val == "false") {
          if (val == "true") cfg.push_back("--" + key);
        } else {
          cfg.push_back("--" + key);
          cfg.push_back(val);
        }
      }
      ++i;
      continue;
    }
    out.push_back(in[i]);
  }
  if (!cfg.empty() && !out.empty()) out.insert(out.begin() + 1, cfg.begin(), cfg.end());  // after the subcommand name
  return out;
}

int run_study_command(int ex, const std::string& family, int k, const std::string& levels, const std::string& policy,
                      const std::string& solver, const std::string& out, bool vtk) {
  StudyConfig c;
  c.example = ex;
  c.family = parse_family(family);
  c.k = k;
  std::tie(c.level_first, c.level_last) = parse_levels(levels);
  if (!policy.empty()) c.policy = DegreePolicy::parse(policy);
  c.solver = solver == "cg" ? SolverKind::CG : solver == "cholesky" ? SolverKind::Cholesky : SolverKind::Auto;
  c.out_dir = out;
  c.vtk = vtk;
  std::printf("example %d, family %s, k = %d, r1 = r2 = %s, levels %d..%d\n", ex, family.c_str(), k,
              c.effective_policy().name().c_str(), c.level_first, c.level_last);
  const ConvergenceReport rep = run_study(c, &std::cout);
  std::cout << '\n';
  write_study_csv(rep, std::cout);
  int failed = 0;
  for (const auto& r : rep.levels) {
    if (!r.failure.empty()) ++failed;
    if (r.error_equation)
      std::printf("error-equation residual on level %d: %.3e (scale %.3e)\n", r.level, r.error_equation->max_abs,
                  r.error_equation->scale);
  }
  return failed == 0 ? 0 : 1;
}

int run_verify(int k_only, const std::string& family_only) {
  int failures = 0;
  auto line = [&failures](bool ok, const std::string& s) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", s.c_str());
    if (!ok) ++failures;
  };
  char buf[256];
  for (GridFamily fam : {GridFamily::A, GridFamily::B}) {
    if (!family_only.empty() && parse_family(family_only) != fam) continue;
    const char fc = fam == GridFamily::A ? 'a' : 'b';
    const DegreePolicy pol = DegreePolicy::for_family(fam);
    for (int k = 1; k <= 3; ++k) {
      if (k_only > 0 && k != k_only) continue;
      const PolyMesh m = generate(fam, 2, Layout::Vertical);

      // projection identities: Q_h of a piecewise polynomial of degree k is exact
      {
        const Discretization d(m, k, pol, k);
        const ManufacturedProblem pb = example(2);
        std::mt19937_64 rng(k);
        const RandomVectorPoly w(k, {0.5, 0.5}, 1.0, rng);
        const Eigen::VectorXd q = project_Qh(d.space(), [&w](Point2 p, int) { return w.value(p); });
        double err = 0.0;
        for (int e = 0; e < d.num_elements(); ++e) {
          const ElementContext& c = d.context(e);
          const Eigen::VectorXd v = d.gather(e, q);
          for (std::size_t i = 0; i < c.quad.size(); ++i)
            err = std::max(err, (c.interior_value(v, c.quad.points[i]) - w.value(c.quad.points[i])).norm());
        }
        std::snprintf(buf, sizeof buf, "family %c k %d: Q_h reproduces degree-k polynomials (max error %.1e)", fc, k, err);
        line(err < 1e-10, buf);
      }
      {
        const auto r = commutation_check(m, k, pol, 5, 11);
        std::snprintf(buf, sizeof buf, "family %c k %d: commutation eps_w = Q_r1 eps, div_w = Q_r2 div (%.1e, %.1e)", fc, k,
                      r.strain_error, r.div_error);
        line(std::max(r.strain_error, r.div_error) <= 1e-10, buf);
      }
      {
        const auto r = kernel_check(m, k, pol, example(2).coeff);
        std::snprintf(buf, sizeof buf, "family %c k %d: unconstrained kernel dimension %d, gap %.1e", fc, k, r.near_zero, r.gap);
        line(r.near_zero == 3 && r.gap >= 1e3, buf);
      }
      {
        const ManufacturedProblem pb = example(3);
        const Discretization d(m, k, pol, pb.data_degree());
        const SparseSpdSystem sys = assemble(d, pb);
        const SolveResult sol = solve(sys);
        const auto im = exact_weak_images(d, pb);
        const auto r = error_equation_residual(d, pb, im, sys, sol.full);
        std::snprintf(buf, sizeof buf, "family %c k %d: error-equation residual %.1e <= 1e-8 * %.1e", fc, k, r.max_abs, r.scale);
        line(r.pass(), buf);
      }
      {
        const auto r = norm_equivalence_levels({fam, Layout::Vertical, 0}, k, pol, example(3).coeff, 2, 50, 5);
        std::snprintf(buf, sizeof buf, "family %c k %d: norm equivalence ratios [%.3f, %.3f] -> [%.3f, %.3f]", fc, k,
                      r.levels[0].min_ratio, r.levels[0].max_ratio, r.levels[1].min_ratio, r.levels[1].max_ratio);
        line(r.covanish && r.nonzero && r.min_drift < 10 && r.max_drift < 10, buf);
      }
    }
  }
  std::printf("%d check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilizer-free weak Galerkin solver for 2D elasticity interface problems"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  int ex = 2, k = 1, n = 2;
  std::string family = "a", levels = "1..4", policy, solver = "auto", out, layout = "vertical";
  bool vtk = false;

  auto* study = app.add_subcommand("study", "run a refinement study and print the CSV table");
  study->add_option("--example", ex, "problem 1..6")->check(CLI::Range(1, 6));
  study->add_option("--family", family, "grid family a or b")->check(CLI::IsMember({"a", "b", "A", "B"}));
  study->add_option("--k", k, "polynomial degree")->check(CLI::Range(1, 8));
  study->add_option("--levels", levels, "refinement levels L0..L1");
  study->add_option("--policy", policy, "operator degree: k+1, k+2, convex, nonconvex or a number");
  study->add_option("--solver", solver, "auto, cholesky or cg")->check(CLI::IsMember({"auto", "cholesky", "cg"}));
  study->add_option("--out", out, "directory for CSV, coefficient dumps and VTK");
  study->add_flag("--vtk", vtk, "write solution VTK files (needs --out)");

  auto* verify = app.add_subcommand("verify", "run the property checks on small meshes");
  int k_only = 0;
  std::string family_only;
  verify->add_option("--k", k_only, "restrict to one degree");
  verify->add_option("--family", family_only, "restrict to one family");

  auto* mesh = app.add_subcommand("mesh", "write a generated mesh as legacy VTK");
  mesh->add_option("--family", family)->check(CLI::IsMember({"a", "b", "A", "B"}));
  mesh->add_option("--n", n, "cells per side");
  mesh->add_option("--layout", layout)->check(CLI::IsMember({"vertical", "square"}));
  mesh->add_option("--out", out, "output file (stdout if empty)");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*study) return run_study_command(ex, family, k, levels, policy, solver, out, vtk);
    if (*verify) return run_verify(k_only, family_only);
    if (*mesh) {
      const PolyMesh m = generate(parse_family(family), n, layout == "square" ? Layout::Square : Layout::Vertical);
      if (out.empty()) {
        write_vtk(m, std::cout);
      } else {
        std::ofstream f(out);
        write_vtk(m, f);
      }
      std::fprintf(stderr, "%zu elements, %zu edges, h = %.4f, shape-regularity %.2f\n", m.num_elements(), m.num_edges(), m.h,
                   shape_regularity(m));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
