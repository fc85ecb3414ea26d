#include <cstdint>

// 64-element dot product with a scalar accumulator recurrence.
constexpr int LEN = 64;

int32_t vecdot(const int32_t a[LEN], const int32_t b[LEN]) {
    int32_t acc = 0;
    ACC: for (int i = 0; i < LEN; i++) {
        acc += a[i] * b[i];
    }
    return acc;
}
