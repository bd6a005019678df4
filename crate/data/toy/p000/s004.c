#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

long long solve(int num) {
    long long sum = 0;
    for (int i = 1; i <= num; i++) {
        if (i % 3 == 0) {
            int d = i * i;
            sum = sum + d;
        }
    }
    return sum;
}

int main() {
    int num = read_int();
    printf("%lld\n", solve(num));
    return 0;
}
