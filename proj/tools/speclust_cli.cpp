// Command-line front end: dataset generation, single clustering runs, and the
// benchmark harness. Subcommands: gen, cluster, bench.

#include <cstdio>

int main() {
  std::puts("speclust: placeholder");
  return 0;
}
