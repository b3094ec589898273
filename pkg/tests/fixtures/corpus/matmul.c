#include <stdio.h>

void matmul(int *a, int *b, int *out, int n) {
  int i;
  int j;
  int k;
  int s;
  for (i = 0; i < n; i++) {
    for (j = 0; j < n; j++) {
      s = 0;
      for (k = 0; k < n; k++) {
        s += a[i * n + k] * b[k * n + j];
      }
      out[i * n + j] = s;
    }
  }
}

int main(void) {
  int a[9] = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  int b[9] = {9, 8, 7, 6, 5, 4, 3, 2, 1};
  int c[9];
  int i;
  matmul(a, b, c, 3);
  for (i = 0; i < 9; i++) {
    printf("%d\n", c[i]);
  }
  return 0;
}
