#include <cstdint>
#include <cstdio>

constexpr int N = 16;

void matmul(const int32_t a[N][N], const int32_t b[N][N], int32_t c[N][N]);

int main() {
    static int32_t a[N][N], b[N][N], c[N][N], ref[N][N];
    for (int i = 0; i < N; i++) {
        for (int j = 0; j < N; j++) {
            a[i][j] = (i * 3 + j) % 7 - 3;
            b[i][j] = (i - j * 5) % 11 - 5;
        }
    }
    for (int i = 0; i < N; i++) {
        for (int j = 0; j < N; j++) {
            int32_t acc = 0;
            for (int k = 0; k < N; k++) {
                acc += a[i][k] * b[k][j];
            }
            ref[i][j] = acc;
        }
    }
    matmul(a, b, c);
    int errors = 0;
    for (int i = 0; i < N; i++) {
        for (int j = 0; j < N; j++) {
            if (c[i][j] != ref[i][j]) {
                errors++;
                std::printf("mismatch at (%d,%d): got %d want %d\n", i, j, c[i][j], ref[i][j]);
            }
        }
    }
    std::printf(errors ? "FAIL (%d errors)\n" : "PASS\n", errors);
    return errors ? 1 : 0;
}
