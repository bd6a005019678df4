#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

int main() {
    long long sum = 0;
    int n = read_int();
    int i = 1;
    while (i <= n) {
        if (i % 3 == 0) {
            int x = i * i;
            sum += x;
        }
        i++;
    }
    printf("%lld\n", sum);
    return 0;
}
