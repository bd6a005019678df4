#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

void print_answer(long long value) {
    printf("%lld\n", value);
}

int main() {
    int steps = 0;
    int cnt = read_int();
    int x[100];
    for (int i = 0; i < cnt; i++) {
        scanf("%d", &x[i]);
        steps++;
    }
    for (int k = cnt - 1; k >= 0; k -= 2) {
        printf("%d\n", x[k]);
    }
    return 0;
}
