#include <cstdint>

// Elementwise addition of two 64-element vectors.
constexpr int LEN = 64;

void vecadd(const int32_t a[LEN], const int32_t b[LEN], int32_t c[LEN]) {
    ADD: for (int i = 0; i < LEN; i++) {
        c[i] = a[i] + b[i];
    }
}
