#include <stdio.h>

int bsearch_int(int *v, int n, int key) {
  int lo = 0;
  int hi = n - 1;
  int mid;
  while (lo <= hi) {
    mid = (lo + hi) / 2;
    if (v[mid] == key) {
      return mid;
    }
    if (v[mid] < key) {
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return -1;
}

int count_pairs(int *v, int n, int target) {
  int i;
  int j;
  int pairs = 0;
  for (i = 0; i < n; i++) {
    for (j = i + 1; j < n; j++) {
      if (v[i] + v[j] == target && v[i] != v[j]) {
        pairs++;
      }
    }
  }
  return pairs;
}

int main(void) {
  int v[7] = {1, 3, 4, 6, 8, 9, 11};
  printf("%d %d %d\n", bsearch_int(v, 7, 8), bsearch_int(v, 7, 5), count_pairs(v, 7, 12));
  return 0;
}
