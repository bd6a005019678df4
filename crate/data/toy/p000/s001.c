#include <stdio.h>

int main() {
    int steps = 0;
    long long total = 0;
    int n;
    scanf("%d", &n);
    for (int i = 1; i <= n; i++) {
        if (i % 3 == 0) {
            int x = i * i;
            total += x;
        }
        steps++;
    }
    printf("%lld\n", total);
    return 0;
}
