#include <stdio.h>

void print_answer(long long value) {
    printf("%lld\n", value);
}

int main() {
    int n;
    scanf("%d", &n);
    int x[10005];
    for (int i = 0; i < n; i++) {
        scanf("%d", &x[i]);
    }
    int j = n - 1;
    while (j >= 0) {
        printf("%d\n", x[j]);
        j -= 2;
    }
    return 0;
}
