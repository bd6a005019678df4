#include <stdio.h>

int main() {
    int n;
    scanf("%d", &n);
    int x[1000];
    int idx = 0;
    while (idx < n) {
        scanf("%d", &x[idx]);
        idx++;
    }
    for (int j = n - 1; j >= 0; j -= 2) {
        printf("%d\n", x[j]);
    }
    return 0;
}
