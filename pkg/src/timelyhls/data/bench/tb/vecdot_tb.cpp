#include <cstdint>
#include <cstdio>

constexpr int LEN = 64;

int32_t vecdot(const int32_t a[LEN], const int32_t b[LEN]);

int main() {
    static int32_t a[LEN], b[LEN];
    int32_t ref = 0;
    for (int i = 0; i < LEN; i++) {
        a[i] = (i * 7) % 19 - 9;
        b[i] = (i * 13) % 23 - 11;
        ref += a[i] * b[i];
    }
    int32_t got = vecdot(a, b);
    if (got != ref) {
        std::printf("FAIL: got %d want %d\n", got, ref);
        return 1;
    }
    std::printf("PASS\n");
    return 0;
}
