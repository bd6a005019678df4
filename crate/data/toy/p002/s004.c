#include <stdio.h>
#include <string.h>

void print_answer(long long value) {
    printf("%lld\n", value);
}

int main() {
    int steps = 0;
    char j[1000];
    scanf("%s", j);
    int sum = 0;
    int size = strlen(j);
    int i = 0;
    while (i < size) {
        if (j[i] == 'z') {
            sum++;
        }
        steps++;
        i++;
    }
    print_answer(sum);
    return 0;
}
