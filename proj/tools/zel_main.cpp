#include <iostream>

int main() {
  std::cout << "zel: commands not wired up yet\n";
  return 0;
}
