#include <stdio.h>

int gcd(int a, int b) {
  int t;
  while (b != 0) {
    t = a % b;
    a = b;
    b = t;
  }
  return a;
}

int lcm(int a, int b) {
  return a / gcd(a, b) * b;
}

int main(void) {
  printf("%d %d\n", gcd(84, 36), lcm(4, 6));
  return 0;
}
