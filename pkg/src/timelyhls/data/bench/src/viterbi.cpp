#include <cstdint>

// Viterbi decoding over an 8-state trellis and 32 observation steps.
constexpr int STEPS = 32;
constexpr int STATES = 8;

void viterbi_decode(const int32_t emit[STEPS * STATES], const int32_t trans[STATES * STATES],
                    int32_t metric[STATES * 2], int32_t path[STEPS * STATES]) {
    STEP: for (int t = 0; t < STEPS; t++) {
        int cur = (t % 2) * STATES;
        int nxt = ((t + 1) % 2) * STATES;
        STATE: for (int s = 0; s < STATES; s++) {
            int best_prev = 0;
            int32_t best_cost = metric[cur + 0] + trans[s];
            int32_t alt = metric[cur + (s % STATES)] + trans[s * STATES + (s % STATES)];
            if (alt < best_cost) {
                best_cost = alt;
                best_prev = s % STATES;
            }
            metric[nxt + s] = best_cost + emit[t * STATES + s];
            path[t * STATES + s] = best_prev;
        }
    }
}
