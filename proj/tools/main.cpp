#include <cstdio>

int main() {
  std::puts("cablepaint: pipeline CLI placeholder");
  return 0;
}
