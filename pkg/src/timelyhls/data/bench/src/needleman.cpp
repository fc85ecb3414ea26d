#include <cstdint>

// Needleman-Wunsch global alignment scores over 16x16 sequences.
constexpr int SEQ = 16;
constexpr int GAP = -2;

static int32_t max3(int32_t a, int32_t b, int32_t c) {
    int32_t m = a;
    if (b > m) {
        m = b;
    }
    if (c > m) {
        m = c;
    }
    return m;
}

void needleman_wunsch(const int32_t seq_a[SEQ], const int32_t seq_b[SEQ],
                      int32_t score[(SEQ + 1) * (SEQ + 1)]) {
    score[0] = 0;
    INIT: for (int k = 1; k <= SEQ; k++) {
        score[k] = k * GAP;
        score[k * (SEQ + 1)] = k * GAP;
    }
    ROW: for (int i = 1; i <= SEQ; i++) {
        COL: for (int j = 1; j <= SEQ; j++) {
            int32_t match = (seq_a[i - 1] == seq_b[j - 1]) ? 1 : -1;
            int32_t diag = score[(i - 1) * (SEQ + 1) + (j - 1)] + match;
            int32_t up = score[(i - 1) * (SEQ + 1) + j] + GAP;
            int32_t left = score[i * (SEQ + 1) + (j - 1)] + GAP;
            score[i * (SEQ + 1) + j] = max3(diag, up, left);
        }
    }
}
