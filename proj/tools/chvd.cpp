#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "chvd/bench.hpp"

using namespace chvd;

namespace {

enum Exit { kOk = 0, kNo = 1, kInvalid = 2, kInternal = 3 };

struct Common {
  std::uint64_t seed = 1;
  bool oracle = false;
  double tolerance = 1e-6;
  int max_iters = 2000;
  std::string trace;
  std::string format = "text";
};

InstanceFile read_instance(const std::string& path) {
  if (path == "-") return parse_instance(std::cin);
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return parse_instance(in);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

void report(const Common& c, const Json& j, const std::string& text) {
  if (c.format == "json")
    std::cerr << j.dump() << '\n';
  else
    std::cerr << text << '\n';
}

LpOptions lp_options(const Common& c) {
  LpOptions lo;
  lo.tolerance = c.tolerance;
  lo.max_rounds = c.max_iters;
  return lo;
}

int cmd_kernelize(const Common& c, const std::string& in, const std::string& out) {
  InstanceFile f = read_instance(in);
  if (!f.forced.empty()) throw std::invalid_argument("kernelize expects an instance without forced pairs");
  Graph g = f.graph();
  VertexList m0 = f.modulator;
  sort_unique(m0);
  std::string source = "file";
  if (m0.empty()) {
    ApproxOptions ao;
    ao.lp = lp_options(c);
    ApproxResult ar = approximate(g, f.k, ao);
    if (ar.no_instance) {
      PlainInstance no = canonical_no();
      InstanceFile kf = make_instance_file(no.g, no.k);
      kf.comments.push_back("kernel: no-instance (" + ar.reason + ")");
      write_text(out, emit_instance(kf));
      if (!c.trace.empty()) write_text(c.trace, "");
      report(c, Json{{"result", "no"}, {"reason", ar.reason}}, "no-instance: " + ar.reason);
      return kNo;
    }
    m0 = ar.solution;
    source = "approximation";
  }
  KernelResult kr = kernelize(g, f.k, m0);
  InstanceFile kf = make_instance_file(kr.kernel.g, kr.kernel.k);
  std::string labels;
  for (int l : kr.kernel.labels) labels += (labels.empty() ? "" : " ") + std::to_string(l);
  kf.comments.push_back("modulator from " + source + ", |M0| = " + std::to_string(m0.size()));
  kf.comments.push_back("labels " + labels);
  write_text(out, emit_instance(kf));
  if (!c.trace.empty()) write_text(c.trace, emit_trace(kr.trace));
  const std::string status = kr.no_instance ? "no" : kr.trivial_yes ? "yes" : "kernel";
  report(c,
         Json{{"result", status},
              {"n", g.size()},
              {"kernel_n", kr.kernel.g.size()},
              {"kernel_m", kr.kernel.g.num_edges()},
              {"k", kr.kernel.k},
              {"modulator", kr.annotated.modulator.size()},
              {"events", kr.trace.events.size()}},
         status + ": " + std::to_string(g.size()) + " -> " + std::to_string(kr.kernel.g.size()) + " vertices, k = " +
             std::to_string(kr.kernel.k) + ", " + std::to_string(kr.trace.events.size()) + " events");
  return kr.no_instance ? kNo : kOk;
}

int cmd_approx(const Common& c, const std::string& in, const std::string& out, bool no_guard) {
  InstanceFile f = read_instance(in);
  Graph g = f.graph();
  ApproxOptions ao;
  ao.exact_guard = !no_guard;
  ao.lp = lp_options(c);
  ApproxResult ar = approximate(g, f.k, ao);
  if (ar.no_instance) {
    report(c, Json{{"result", "no"}, {"reason", ar.reason}, {"lp", ar.lp_value}}, "no-instance: " + ar.reason);
    return kNo;
  }
  write_text(out, emit_solution(ar.solution));
  Json j{{"result", "yes"}, {"size", ar.solution.size()}, {"lp", ar.lp_value}, {"oracle_shortcut", ar.used_oracle}};
  std::string text = "solution of size " + std::to_string(ar.solution.size()) + ", lp " + bench::fmt(ar.lp_value, 6);
  if (c.oracle) {
    int best = chvd_optimum(g);
    double ratio = best > 0 ? static_cast<double>(ar.solution.size()) / best : 1.0;
    j["optimum"] = best;
    j["ratio"] = ratio;
    text += ", optimum " + std::to_string(best) + ", ratio " + bench::fmt(ratio);
  }
  report(c, j, text);
  return kOk;
}

int cmd_solve(const Common& c, const std::string& in, const std::string& out) {
  InstanceFile f = read_instance(in);
  auto s = exact_chvd_forced(f.graph(), f.k, f.forced);
  if (!s) {
    report(c, Json{{"result", "no"}}, "no-instance");
    return kNo;
  }
  write_text(out, emit_solution(*s));
  report(c, Json{{"result", "yes"}, {"size", s->size()}}, "optimum " + std::to_string(s->size()));
  return kOk;
}

int cmd_check(const Common& c, const std::string& in, const std::string& sol) {
  InstanceFile f = read_instance(in);
  std::ifstream sin(sol);
  if (!sin) throw std::invalid_argument("cannot open " + sol);
  VertexList x = parse_solution(sin);
  Graph g = f.graph();
  std::string why;
  Mask rest = full_mask(g.size());
  for (Vertex v : x) {
    if (v >= g.size()) why = "vertex " + std::to_string(v) + " out of range";
    else rest[v] = 0;
  }
  if (why.empty() && static_cast<int>(x.size()) > f.k) why = "solution larger than k";
  if (why.empty())
    if (auto h = find_any_hole(g, &rest)) {
      why = "hole remains:";
      for (Vertex v : h->cycle) why += " " + std::to_string(v);
    }
  if (why.empty())
    for (auto [u, v] : f.forced)
      if (rest[u] && rest[v]) why = "forced pair " + std::to_string(u) + " " + std::to_string(v) + " not hit";
  if (!why.empty()) {
    report(c, Json{{"valid", false}, {"reason", why}}, "invalid: " + why);
    return kInvalid;
  }
  report(c, Json{{"valid", true}, {"size", x.size()}}, "valid solution of size " + std::to_string(x.size()));
  return kOk;
}

int cmd_gen(const Common& c, GeneratorSpec spec, const std::string& out) {
  spec.seed = c.seed;
  Generated gen = generate(spec);
  InstanceFile f = make_instance_file(gen.g, gen.k);
  std::string planted;
  for (Vertex v : gen.planted) planted += " " + std::to_string(v);
  f.comments.push_back("seed " + std::to_string(spec.seed) + " core " + std::to_string(spec.core) + " planted" +
                       planted);
  write_text(out, emit_instance(f));
  return kOk;
}

int cmd_bench(const Common& c, int only) {
  BenchOptions bo;
  bo.seed = c.seed;
  using Fn = CriterionResult (*)(const BenchOptions&);
  const Fn all[] = {[](const BenchOptions& o) { return criterion_flower(o); },
                    [](const BenchOptions& o) { return criterion_kernel(o); },
                    [](const BenchOptions& o) { return criterion_structure(o); },
                    [](const BenchOptions& o) { return criterion_skew(o); },
                    [](const BenchOptions& o) { return criterion_downward(o); },
                    [](const BenchOptions& o) { return criterion_approx(o); },
                    [](const BenchOptions& o) { return criterion_lp(o); },
                    [](const BenchOptions& o) { return criterion_determinism(o); }};
  bool ok = true;
  for (int i = 0; i < 8; ++i) {
    if (only && only != i + 1) continue;
    CriterionResult r = all[i](bo);
    ok = ok && r.pass;
    if (c.format == "json")
      std::cout << to_json(r).dump() << '\n';
    else
      std::cout << format_line(r) << '\n';
    std::cout.flush();
  }
  return ok ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chordal vertex deletion: kernelization, approximation and exact solving"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--seed", c.seed, "Random seed");
  app.add_flag("--oracle", c.oracle, "Compare with the exact optimum");
  app.add_option("--tolerance", c.tolerance, "LP feasibility tolerance");
  app.add_option("--max-iters", c.max_iters, "Cutting-plane round limit");
  app.add_option("--trace", c.trace, "Write the reduction trace here");
  app.add_option("--format", c.format, "Report format")->check(CLI::IsMember({"text", "json"}));

  std::string in = "-", out, sol;
  bool no_guard = false;
  int only = 0;
  GeneratorSpec spec;

  auto* kern = app.add_subcommand("kernelize", "Reduce an instance to a kernel");
  kern->add_option("input", in, "Instance file ('-' for stdin)");
  kern->add_option("-o,--output", out, "Kernel file");
  auto* apx = app.add_subcommand("approx", "Approximate solution or a NO certificate");
  apx->add_option("input", in, "Instance file");
  apx->add_option("-o,--output", out, "Solution file");
  apx->add_flag("--no-guard", no_guard, "Never shortcut small instances to the exact solver");
  auto* solve = app.add_subcommand("solve", "Exact minimum solution");
  solve->add_option("input", in, "Instance file");
  solve->add_option("-o,--output", out, "Solution file");
  auto* check = app.add_subcommand("check", "Verify a claimed solution");
  check->add_option("input", in, "Instance file")->required();
  check->add_option("solution", sol, "Solution file")->required();
  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("-o,--output", out, "Instance file");
  gen->add_option("--core", spec.core, "Chordal core size");
  gen->add_option("--tree-nodes", spec.tree_nodes, "Host tree nodes");
  gen->add_option("--subtree-max", spec.subtree_max, "Largest subtree per core vertex");
  gen->add_option("--planted", spec.planted, "Planted solution size");
  gen->add_option("--noise", spec.noise, "Noise edges at planted vertices");
  auto* bench = app.add_subcommand("bench", "Run the acceptance suites");
  bench->add_option("--only", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));

  for (auto* sub : {kern, apx, solve, check, gen, bench}) sub->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*kern) return cmd_kernelize(c, in, out);
    if (*apx) return cmd_approx(c, in, out, no_guard);
    if (*solve) return cmd_solve(c, in, out);
    if (*check) return cmd_check(c, in, sol);
    if (*gen) return cmd_gen(c, spec, out);
    if (*bench) return cmd_bench(c, only);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kInvalid;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
