#include <stdio.h>

int is_space(int ch) {
  return ch == ' ' || ch == '\n' || ch == '\t';
}

int main(void) {
  int ch;
  int words = 0;
  int lines = 0;
  int inside = 0;
  while ((ch = getchar()) != EOF) {
    if (ch == '\n') {
      lines++;
    }
    if (is_space(ch)) {
      inside = 0;
    } else if (!inside) {
      inside = 1;
      words++;
    }
  }
  printf("lines=%d words=%d\n", lines, words);
  return 0;
}
