#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

int main() {
    int n = read_int();
    int best = 0;
    while (n > 0) {
        int a = n % 2;
        best += 1;
        n = n / 2;
    }
    printf("%d\n", best);
    return 0;
}
