#include <stdio.h>

int sieve(int limit) {
  char marks[200];
  int i;
  int j;
  int count = 0;
  for (i = 0; i < limit; i++) {
    marks[i] = 1;
  }
  for (i = 2; i < limit; i++) {
    if (marks[i]) {
      count++;
      for (j = i * i; j < limit; j += i) {
        marks[j] = 0;
      }
    }
  }
  return count;
}

int main(void) {
  printf("%d\n", sieve(200));
  return 0;
}
