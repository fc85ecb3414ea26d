#include <cstdint>
#include <cstdio>

constexpr int DIM = 16;

void matvec(const int32_t mat[DIM][DIM], const int32_t vec[DIM], int32_t out[DIM]);

int main() {
    static int32_t mat[DIM][DIM], vec[DIM], out[DIM];
    for (int r = 0; r < DIM; r++) {
        vec[r] = (r * 9) % 21 - 10;
        for (int c = 0; c < DIM; c++) {
            mat[r][c] = (r * 5 + c * 3) % 15 - 7;
        }
    }
    matvec(mat, vec, out);
    int errors = 0;
    for (int r = 0; r < DIM; r++) {
        int32_t acc = 0;
        for (int c = 0; c < DIM; c++) {
            acc += mat[r][c] * vec[c];
        }
        if (out[r] != acc) {
            errors++;
        }
    }
    std::printf(errors ? "FAIL (%d errors)\n" : "PASS\n", errors);
    return errors ? 1 : 0;
}
