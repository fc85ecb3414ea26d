#include <cstdint>
#include <cstdio>

constexpr int LEN = 64;

void bitonic_sort(int32_t data[LEN]);

int main() {
    static int32_t data[LEN];
    for (int i = 0; i < LEN; i++) {
        data[i] = (i * 37 + 11) % 101 - 50;
    }
    bitonic_sort(data);
    int errors = 0;
    for (int i = 1; i < LEN; i++) {
        if (data[i - 1] > data[i]) {
            errors++;
        }
    }
    std::printf(errors ? "FAIL (%d inversions)\n" : "PASS\n", errors);
    return errors ? 1 : 0;
}
