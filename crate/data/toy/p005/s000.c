#include <stdio.h>

void print_answer(long long value) {
    printf("%lld\n", value);
}

int digits(int n) {
    if (n == 0) {
        return 0;
    }
    return 1 + digits(n / 2);
}

int main() {
    int steps = 0;
    int n;
    scanf("%d", &n);
    print_answer(digits(n));
    return 0;
}
