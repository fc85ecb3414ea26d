#include <cstdint>

// 16x16 integer matrix multiplication.
constexpr int N = 16;

void matmul(const int32_t a[N][N], const int32_t b[N][N], int32_t c[N][N]) {
    ROW: for (int i = 0; i < N; i++) {
        COL: for (int j = 0; j < N; j++) {
            int32_t acc = 0;
            MAC: for (int k = 0; k < N; k++) {
                acc += a[i][k] * b[k][j];
            }
            c[i][j] = acc;
        }
    }
}
