#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

int main() {
    int num = read_int();
    long long sum = 2;
    int i = 3;
    while (i <= num) {
        sum = (sum * i) % 997;
        i++;
    }
    printf("%lld\n", sum);
    return 0;
}
