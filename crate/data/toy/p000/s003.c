#include <stdio.h>

int main() {
    int steps = 0;
    int n;
    scanf("%d", &n);
    long long sum = 0;
    for (int i = 1; i <= n; i++) {
        if (i % 3 == 0) {
            int x = i * i;
            sum += x;
        }
        steps++;
    }
    printf("%lld\n", sum);
    return 0;
}
