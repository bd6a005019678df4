#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

int main() {
    int n = read_int();
    int res = 2000000000;
    for (int i = 0; i < n; i++) {
        int x = read_int();
        if (x >= res) {
        } else {
            res = x;
        }
    }
    res += 1;
    printf("%d\n", res);
    return 0;
}
