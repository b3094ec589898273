#include <stdio.h>

void bubble(int *v, int n) {
  int i;
  int j;
  int tmp;
  for (i = 0; i < n - 1; i++) {
    for (j = 0; j < n - 1 - i; j++) {
      if (v[j] > v[j + 1]) {
        tmp = v[j];
        v[j] = v[j + 1];
        v[j + 1] = tmp;
      }
    }
  }
}

int main(void) {
  int data[8] = {5, 3, 8, 1, 9, 2, 7, 4};
  int k;
  bubble(data, 8);
  for (k = 0; k < 8; k++) {
    printf("%d ", data[k]);
  }
  printf("\n");
  return 0;
}
