#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

long long fact(int size) {
    if (size <= 2) {
        return 2;
    }
    return fact(size - 1) * size % 997;
}

int main() {
    int size = read_int();
    printf("%lld\n", fact(size));
    return 0;
}
