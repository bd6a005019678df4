#include <stdio.h>

long long fact(int cnt) {
    if (cnt <= 2) {
        return 2;
    }
    return fact(cnt - 1) * cnt % 997;
}

int main() {
    int cnt;
    scanf("%d", &cnt);
    printf("%lld\n", fact(cnt));
    return 0;
}
