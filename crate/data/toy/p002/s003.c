#include <stdio.h>
#include <string.h>

int main() {
    char pos[256];
    scanf("%s", pos);
    int sum = 0;
    int n = strlen(pos);
    for (int i = 0; i < n; i++) {
        if (pos[i] == 'z') {
            sum = sum + 1;
        }
    }
    printf("%d\n", sum);
    return 0;
}
