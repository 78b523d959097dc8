#include <cstdio>

int main() {
  std::puts("rgames: no subcommand given");
  return 2;
}
