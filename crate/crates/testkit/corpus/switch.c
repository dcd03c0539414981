enum op { ADD, SUB, MUL };

int apply(enum op o, int a, int b) {
    int r = 0;
    switch (o) {
        case ADD: {
            r = a + b;
            break;
        }
        case SUB:
            r = a - b;
            break;
        default: {
            r = a * b;
        }
    }
    return r;
}

int collatz(int n) {
    int steps = 0;
    while (n != 1) {
        if (n % 2 == 0) { n = n / 2; } else { n = 3 * n + 1; }
        steps++;
    }
    return steps;
}
