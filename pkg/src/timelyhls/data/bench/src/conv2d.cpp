#include <cstdint>

// 3x3 convolution over a 16x16 output window of an 18x18 input.
constexpr int OUT = 16;
constexpr int KDIM = 3;

void conv2d(const int32_t img[OUT + 2][OUT + 2], const int32_t coef[KDIM * KDIM],
            int32_t out[OUT][OUT]) {
    ROW: for (int r = 0; r < OUT; r++) {
        COL: for (int c = 0; c < OUT; c++) {
            int32_t acc = 0;
            TAP: for (int t = 0; t < KDIM * KDIM; t++) {
                acc += img[r + t / KDIM][c + t % KDIM] * coef[t];
            }
            out[r][c] = acc;
        }
    }
}
