#include "platform.h"

#if defined(_WIN32) || defined(_WIN64)
#include <windows.h>
static long ticks(void) {
    return (long) GetTickCount();
}
#elif defined(__APPLE__) && !defined(PLAIN_POSIX)
#include <mach/mach_time.h>
static long ticks(void) {
    return (long) mach_absolute_time();
}
#else
#include <time.h>
static long ticks(void) {
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return ts.tv_sec * 1000 + ts.tv_nsec / 1000000;
}
#endif

#ifndef NO_LOGGING
void log_event(const char *what) {
#ifdef LOG_TIMESTAMPS
    printf("[%ld] %s\n", ticks(), what);
#else
    printf("%s\n", what);
#endif
}
#endif

int wait_for(int (*ready)(void), long timeout) {
    long start = ticks();
    do {
        if (ready()) {
            return 1;
        }
    } while (ticks() - start < timeout);
    return 0;
}
