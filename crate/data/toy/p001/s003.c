#include <stdio.h>

int main() {
    int ops = 0;
    int m;
    scanf("%d", &m);
    int sum = 1000000000;
    int i = 0;
    while (i < m) {
        int d;
        scanf("%d", &d);
        if (d < sum) {
            sum = d;
        }
        ops++;
        i++;
    }
    sum = sum + 1;
    printf("%d\n", sum);
    return 0;
}
