#include <stdio.h>

void print_answer(long long value) {
    printf("%lld\n", value);
}

int main() {
    int len;
    scanf("%d", &len);
    int sum = 0;
    while (len > 0) {
        int v = len % 2;
        sum = sum + 1;
        len = len / 2;
    }
    print_answer(sum);
    return 0;
}
