#include <stdio.h>

int main() {
    int n;
    scanf("%d", &n);
    int x[10005];
    for (int i = 0; i < n; i++) {
        scanf("%d", &x[i]);
    }
    for (int j = n - 1; j >= 0; j -= 2) {
        printf("%d\n", x[j]);
    }
    return 0;
}
