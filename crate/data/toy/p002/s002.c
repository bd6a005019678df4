#include <stdio.h>

int main() {
    char j[128];
    scanf("%s", j);
    int sum = 0;
    int i = 0;
    while (j[i] != '\0') {
        if (j[i] == 'z') {
            sum = sum + 1;
        }
        i++;
    }
    printf("%d\n", sum);
    return 0;
}
