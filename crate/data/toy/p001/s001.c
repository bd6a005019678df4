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
    int n = read_int();
    int result = 2000000000;
    int i = 0;
    while (i < n) {
        int d = read_int();
        if (d >= result) {
        } else {
            result = d;
        }
        i++;
    }
    result = result + 1;
    print_answer(result);
    return 0;
}
