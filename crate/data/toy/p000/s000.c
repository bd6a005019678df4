#include <stdio.h>

void print_answer(long long value) {
    printf("%lld\n", value);
}

int main() {
    long long sum = 0;
    int n;
    scanf("%d", &n);
    for (int i = 1; i <= n; i++) {
        if (i % 3 == 0) {
            int x = i * i;
            sum += x;
        }
    }
    print_answer(sum);
    return 0;
}
