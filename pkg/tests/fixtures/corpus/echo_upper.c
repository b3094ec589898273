#include <stdio.h>

int to_upper(int ch) {
  if (ch >= 'a' && ch <= 'z') {
    return ch - 32;
  }
  return ch;
}

int main(void) {
  int ch;
  int count = 0;
  ch = getchar();
  while (ch != EOF) {
    putchar(to_upper(ch));
    count++;
    ch = getchar();
  }
  printf("\n%d chars\n", count);
  return 0;
}
