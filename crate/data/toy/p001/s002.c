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
    int sum = 1000000000;
    for (int i = 0; i < cnt; i++) {
        int x = read_int();
        if (x < sum) {
            sum = x;
        }
        steps++;
    }
    sum += 1;
    print_answer(sum);
    return 0;
}
