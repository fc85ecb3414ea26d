#include <cstdint>
#include <cstdio>

constexpr int ITERS = 16;

void cordic(int32_t angle, const int32_t atan_table[ITERS], int32_t *x_out, int32_t *y_out);

int main() {
    static const int32_t atan_table[ITERS] = {
        51471, 30385, 16054, 8149, 4090, 2047, 1023, 511,
        255, 127, 63, 31, 15, 7, 3, 1,
    };
    int32_t angle = 34314;  // ~30 degrees in Q16 radians
    int32_t x = 0, y = 0;
    cordic(angle, atan_table, &x, &y);
    // reference: same rotation computed step by step
    int32_t rx = 39797, ry = 0, rz = angle;
    for (int i = 0; i < ITERS; i++) {
        int32_t dx = rx >> i;
        int32_t dy = ry >> i;
        if (rz >= 0) {
            rx -= dy;
            ry += dx;
            rz -= atan_table[i];
        } else {
            rx += dy;
            ry -= dx;
            rz += atan_table[i];
        }
    }
    if (x != rx || y != ry) {
        std::printf("FAIL: got (%d,%d) want (%d,%d)\n", x, y, rx, ry);
        return 1;
    }
    std::printf("PASS\n");
    return 0;
}
