#include <stdio.h>

int read_int() {
    int value;
    scanf("%d", &value);
    return value;
}

int main() {
    char j[105];
    scanf("%s", j);
    int sum = 0;
    int i = 0;
    while (j[i] != '\0') {
        if (j[i] == 'z') {
            sum++;
        }
        i++;
    }
    printf("%d\n", sum);
    return 0;
}
