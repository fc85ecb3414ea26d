#include <cstdint>
#include <cstdio>

constexpr int SEQ = 16;
constexpr int GAP = -2;

void needleman_wunsch(const int32_t seq_a[SEQ], const int32_t seq_b[SEQ],
                      int32_t score[(SEQ + 1) * (SEQ + 1)]);

static int32_t rmax3(int32_t a, int32_t b, int32_t c) {
    int32_t m = a > b ? a : b;
    return m > c ? m : c;
}

int main() {
    static int32_t seq_a[SEQ], seq_b[SEQ];
    static int32_t score[(SEQ + 1) * (SEQ + 1)], ref[(SEQ + 1) * (SEQ + 1)];
    for (int i = 0; i < SEQ; i++) {
        seq_a[i] = (i * 3) % 4;
        seq_b[i] = (i * 5 + 1) % 4;
    }
    ref[0] = 0;
    for (int k = 1; k <= SEQ; k++) {
        ref[k] = k * GAP;
        ref[k * (SEQ + 1)] = k * GAP;
    }
    for (int i = 1; i <= SEQ; i++) {
        for (int j = 1; j <= SEQ; j++) {
            int32_t match = (seq_a[i - 1] == seq_b[j - 1]) ? 1 : -1;
            ref[i * (SEQ + 1) + j] = rmax3(
                ref[(i - 1) * (SEQ + 1) + (j - 1)] + match,
                ref[(i - 1) * (SEQ + 1) + j] + GAP,
                ref[i * (SEQ + 1) + (j - 1)] + GAP);
        }
    }
    needleman_wunsch(seq_a, seq_b, score);
    int errors = 0;
    for (int k = 0; k < (SEQ + 1) * (SEQ + 1); k++) {
        if (score[k] != ref[k]) {
            errors++;
        }
    }
    std::printf(errors ? "FAIL (%d errors)\n" : "PASS\n", errors);
    return errors ? 1 : 0;
}
