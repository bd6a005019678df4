#include <stdio.h>

void print_answer(long long value) {
    printf("%lld\n", value);
}

int main() {
    int steps = 0;
    int n;
    scanf("%d", &n);
    long long sum = 2;
    for (int i = 3; i <= n; i++) {
        sum = (sum * i) % 997;
        steps++;
    }
    print_answer(sum);
    return 0;
}
