#include <stdio.h>

int is_prime(int n) {
  int d;
  if (n < 2) {
    return 0;
  }
  for (d = 2; d * d <= n; d++) {
    if (n % d == 0) {
      return 0;
    }
  }
  return 1;
}

int count_primes(int limit) {
  int n;
  int count = 0;
  for (n = 0; n < limit; n++) {
    if (is_prime(n)) {
      count++;
    }
  }
  return count;
}

int main(void) {
  printf("primes below 100: %d\n", count_primes(100));
  return 0;
}
