// Command-line front end for the gvcod pipeline. Subcommands are wired up
// as the corresponding modules land.
#include <cstdio>

int main() {
  std::puts("gvcod: no subcommands wired yet");
  return 2;
}
