#include <cstdint>

// Bitonic sorting network over 64 elements, flattened to 15 merge passes
// of 32 compare-exchange pairs each.
constexpr int LEN = 64;
constexpr int PASSES = 15;
constexpr int PAIRS = 32;

static void compare_exchange(int32_t data[LEN], int lo, int hi, bool up) {
    if (up == (data[lo] > data[hi])) {
        int32_t tmp = data[lo];
        data[lo] = data[hi];
        data[hi] = tmp;
    }
}

void bitonic_sort(int32_t data[LEN]) {
    int sizes[PASSES] = {2, 4, 2, 8, 4, 2, 16, 8, 4, 2, 32, 16, 8, 4, 2};
    int blocks[PASSES] = {2, 4, 4, 8, 8, 8, 16, 16, 16, 16, 32, 32, 32, 32, 32};
    STAGE: for (int s = 0; s < PASSES; s++) {
        int half = sizes[s] / 2;
        COMP: for (int p = 0; p < PAIRS; p++) {
            int group = p / half;
            int offset = p % half;
            int lo = group * sizes[s] + offset;
            int hi = lo + half;
            bool up = ((lo / blocks[s]) % 2) == 0;
            compare_exchange(data, lo, hi, up);
        }
    }
}
