#include <cstdint>

// Fixed-point CORDIC rotation, 16 iterations, Q16 angles.
constexpr int ITERS = 16;

void cordic(int32_t angle, const int32_t atan_table[ITERS], int32_t *x_out, int32_t *y_out) {
    int32_t x = 39797;  // 0.6073 * 2^16: CORDIC gain compensation
    int32_t y = 0;
    int32_t z = angle;
    ITER: for (int i = 0; i < ITERS; i++) {
        int32_t dx = x >> i;
        int32_t dy = y >> i;
        if (z >= 0) {
            x -= dy;
            y += dx;
            z -= atan_table[i];
        } else {
            x += dy;
            y -= dx;
            z += atan_table[i];
        }
    }
    *x_out = x;
    *y_out = y;
}
