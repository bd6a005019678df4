#include <stdio.h>
#include <string.h>

void print_answer(long long value) {
    printf("%lld\n", value);
}

int main() {
    char j[256];
    scanf("%s", j);
    int sum = 0;
    int n = strlen(j);
    for (int i = 0; i < n; i++) {
        if (j[i] == 'z') {
            sum++;
        }
    }
    print_answer(sum);
    return 0;
}
