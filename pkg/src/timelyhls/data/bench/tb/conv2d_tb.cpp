#include <cstdint>
#include <cstdio>

constexpr int OUT = 16;
constexpr int KDIM = 3;

void conv2d(const int32_t img[OUT + 2][OUT + 2], const int32_t coef[KDIM * KDIM],
            int32_t out[OUT][OUT]);

int main() {
    static int32_t img[OUT + 2][OUT + 2], coef[KDIM * KDIM], out[OUT][OUT];
    for (int r = 0; r < OUT + 2; r++) {
        for (int c = 0; c < OUT + 2; c++) {
            img[r][c] = (r * 31 + c * 17) % 13 - 6;
        }
    }
    for (int t = 0; t < KDIM * KDIM; t++) {
        coef[t] = t - 4;
    }
    conv2d(img, coef, out);
    int errors = 0;
    for (int r = 0; r < OUT; r++) {
        for (int c = 0; c < OUT; c++) {
            int32_t acc = 0;
            for (int t = 0; t < KDIM * KDIM; t++) {
                acc += img[r + t / KDIM][c + t % KDIM] * coef[t];
            }
            if (out[r][c] != acc) {
                errors++;
            }
        }
    }
    std::printf(errors ? "FAIL (%d errors)\n" : "PASS\n", errors);
    return errors ? 1 : 0;
}
