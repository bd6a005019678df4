#include <stdio.h>

long long fact(int n) {
    if (n <= 2) {
        return 2;
    }
    return fact(n - 1) * n % 997;
}

int main() {
    int iters = 0;
    int n;
    scanf("%d", &n);
    printf("%lld\n", fact(n));
    return 0;
}
