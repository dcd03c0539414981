// student submission: does not compile
int sum(int *a, int n) {
    int s = 0;
    for (int i = 0; i < n; i++) {
        if (a[i] > 0) {
            s += a[i];
        
    }
    return s;
}

int main() {
    int v[3] = {1, 2, 3};
    printf("%d\n", sum(v, 3));
    }
    return 0;
}
}
