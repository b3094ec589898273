#include <stdio.h>

long long ipow(long long base, int exp) {
  long long result = 1;
  while (exp > 0) {
    if (exp & 1) {
      result *= base;
    }
    base *= base;
    exp >>= 1;
  }
  return result;
}

int main(void) {
  int e;
  for (e = 0; e < 6; e++) {
    printf("3^%d = %lld\n", e, ipow(3, e));
  }
  return 0;
}
