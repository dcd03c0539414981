#include <stdio.h>
#include <stdlib.h>

#define MAX_STUDENTS 64

struct student {
    char name[32];
    int scores[5];
    double average;
};

/* Computes the average of every student.
   Braces in comments { like this } are ignored. */
static void compute_averages(struct student *list, int count) {
    for (int i = 0; i < count; i++) {
        int total = 0;
        for (int j = 0; j < 5; j++) {
            total += list[i].scores[j];
        }
        list[i].average = total / 5.0;
    }
}

static char letter_for(double average) {
    if (average >= 90.0) {
        return 'A';
    } else if (average >= 80.0) {
        return 'B';
    } else if (average >= 70.0) {
        return 'C';
    } else {
        return 'F';
    }
}

int main(int argc, char **argv) {
    struct student list[MAX_STUDENTS];
    int count = 0;
    FILE *in = fopen(argc > 1 ? argv[1] : "grades.txt", "r");
    if (in == NULL) {
        fprintf(stderr, "cannot open {input}\n");
        return 1;
    }
    while (count < MAX_STUDENTS && fscanf(in, "%31s", list[count].name) == 1) {
        for (int k = 0; k < 5; k++) {
            fscanf(in, "%d", &list[count].scores[k]);
        }
        count++;
    }
    fclose(in);
    compute_averages(list, count);
#ifdef VERBOSE
    for (int i = 0; i < count; i++) {
        printf("%s: %.1f %c\n", list[i].name, list[i].average, letter_for(list[i].average));
    }
#else
    printf("%d students\n", count);
#endif
    return 0;
}
