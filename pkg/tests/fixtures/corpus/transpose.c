#include <stdio.h>

void transpose(int *m, int n) {
  int i;
  int j;
  int t;
  for (i = 0; i < n; i++) {
    for (j = i + 1; j < n; j++) {
      t = m[i * n + j];
      m[i * n + j] = m[j * n + i];
      m[j * n + i] = t;
    }
  }
}

void show(int *m, int n) {
  int i;
  int j;
  for (i = 0; i < n; i++) {
    for (j = 0; j < n; j++) {
      printf("%3d", m[i * n + j]);
    }
    printf("\n");
  }
}

int main(void) {
  int m[16];
  int i;
  for (i = 0; i < 16; i++) {
    m[i] = i;
  }
  transpose(m, 4);
  show(m, 4);
  return 0;
}
