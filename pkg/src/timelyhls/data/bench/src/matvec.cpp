#include <cstdint>

// 16x16 matrix times 16-vector.
constexpr int DIM = 16;

void matvec(const int32_t mat[DIM][DIM], const int32_t vec[DIM], int32_t out[DIM]) {
    ROW: for (int r = 0; r < DIM; r++) {
        int32_t acc = 0;
        COL: for (int c = 0; c < DIM; c++) {
            acc += mat[r][c] * vec[c];
        }
        out[r] = acc;
    }
}
