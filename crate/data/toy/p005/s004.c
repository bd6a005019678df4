#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

int digits(int n) {
    if (n == 0) {
        return 0;
    }
    return 1 + digits(n / 2);
}

int main() {
    int n = read_int();
    printf("%d\n", digits(n));
    return 0;
}
