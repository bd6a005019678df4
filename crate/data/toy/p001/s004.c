#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

int main() {
    int n = read_int();
    int sum = 2000000000;
    for (int i = 0; i < n; i++) {
        int a = read_int();
        if (a >= sum) {
        } else {
            sum = a;
        }
    }
    sum += 1;
    printf("%d\n", sum);
    return 0;
}
