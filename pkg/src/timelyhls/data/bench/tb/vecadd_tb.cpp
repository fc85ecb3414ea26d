#include <cstdint>
#include <cstdio>

constexpr int LEN = 64;

void vecadd(const int32_t a[LEN], const int32_t b[LEN], int32_t c[LEN]);

int main() {
    static int32_t a[LEN], b[LEN], c[LEN];
    for (int i = 0; i < LEN; i++) {
        a[i] = i * 3 - 50;
        b[i] = 100 - i * 2;
    }
    vecadd(a, b, c);
    int errors = 0;
    for (int i = 0; i < LEN; i++) {
        if (c[i] != a[i] + b[i]) {
            errors++;
        }
    }
    std::printf(errors ? "FAIL (%d errors)\n" : "PASS\n", errors);
    return errors ? 1 : 0;
}
