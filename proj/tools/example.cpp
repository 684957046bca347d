// Kernelize a planted instance, then solve the kernel and the original exactly.
#include <iostream>

#include "chvd/bench.hpp"

using namespace chvd;

int main(int argc, char** argv) {
  GeneratorSpec spec;
  spec.seed = argc > 1 ? std::stoull(argv[1]) : 7;
  spec.core = 14;
  spec.planted = 2;
  Generated gen = generate(spec);
  std::cout << "instance: n = " << gen.g.size() << ", m = " << gen.g.num_edges() << ", k = " << gen.k << '\n';

  ApproxResult ar = approximate(gen.g, gen.k);
  if (ar.no_instance) {
    std::cout << "approximation says no: " << ar.reason << '\n';
    return 0;
  }
  std::cout << "approximate solution: " << ar.solution.size() << " vertices";
  if (ar.used_oracle)
    std::cout << " (small instance, solved exactly)\n";
  else
    std::cout << ", lp " << ar.lp_value << '\n';

  KernelResult kr = kernelize(gen.g, gen.k, ar.solution);
  std::cout << "kernel: n = " << kr.kernel.g.size() << ", k = " << kr.kernel.k << ", " << kr.trace.events.size()
            << " events\n";
  for (const char* rule : {"annotate", "rule1", "rule2", "rule3", "rule4", "rule5", "rule6", "rule7"})
    if (int c = kr.trace.count(rule)) std::cout << "  " << rule << ": " << c << '\n';

  const bool original = exact_chvd(gen.g, gen.k).has_value();
  const bool kernel = exact_chvd(kr.kernel.g, kr.kernel.k).has_value();
  std::cout << "answer: original " << (original ? "yes" : "no") << ", kernel " << (kernel ? "yes" : "no") << '\n';
  return original == kernel ? 0 : 1;
}
