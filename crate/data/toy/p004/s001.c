#include <stdio.h>

void print_answer(long long value) {
    printf("%lld\n", value);
}

int main() {
    int n;
    scanf("%d", &n);
    int val[1000];
    int i = 0;
    while (i < n) {
        scanf("%d", &val[i]);
        i++;
    }
    int j = n - 1;
    while (j >= 0) {
        printf("%d\n", val[j]);
        j -= 2;
    }
    return 0;
}
