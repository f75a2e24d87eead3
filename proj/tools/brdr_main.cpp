#include <cstdio>

int main() {
  std::printf("brdr: no subcommands wired up yet\n");
  return 1;
}
