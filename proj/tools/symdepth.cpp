#include <cstdio>

int main() {
  std::puts("symdepth: subcommands not wired yet");
  return 0;
}
