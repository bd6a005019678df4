#include <stdio.h>

int main() {
    int steps = 0;
    int size;
    scanf("%d", &size);
    int sum = 0;
    while (size > 0) {
        int x = size % 2;
        sum += 1;
        steps++;
        size /= 2;
    }
    printf("%d\n", sum);
    return 0;
}
