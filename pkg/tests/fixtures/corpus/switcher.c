#include <stdio.h>

int classify(int c) {
  switch (c % 4) {
  case 0:
    return 10;
  case 1:
    return 20;
  case 2:
    return c > 5 ? 30 : 31;
  default:
    return 40;
  }
}

int main(void) {
  int i;
  int acc = 0;
  for (i = 0; i < 12; i++) {
    acc += classify(i);
  }
  printf("acc=%d\n", acc);
  return 0;
}
