#include <cstdint>
#include <cstdio>
#include <cstring>

constexpr int STEPS = 32;
constexpr int STATES = 8;

void viterbi_decode(const int32_t emit[STEPS * STATES], const int32_t trans[STATES * STATES],
                    int32_t metric[STATES * 2], int32_t path[STEPS * STATES]);

static void reference(const int32_t *emit, const int32_t *trans, int32_t *metric, int32_t *path) {
    for (int t = 0; t < STEPS; t++) {
        int cur = (t % 2) * STATES;
        int nxt = ((t + 1) % 2) * STATES;
        for (int s = 0; s < STATES; s++) {
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

int main() {
    static int32_t emit[STEPS * STATES], trans[STATES * STATES];
    static int32_t metric[STATES * 2], metric_ref[STATES * 2];
    static int32_t path[STEPS * STATES], path_ref[STEPS * STATES];
    for (int i = 0; i < STEPS * STATES; i++) {
        emit[i] = (i * 5) % 17;
    }
    for (int i = 0; i < STATES * STATES; i++) {
        trans[i] = (i * 3) % 9;
    }
    std::memset(metric, 0, sizeof metric);
    std::memset(metric_ref, 0, sizeof metric_ref);
    viterbi_decode(emit, trans, metric, path);
    reference(emit, trans, metric_ref, path_ref);
    int errors = std::memcmp(path, path_ref, sizeof path) != 0;
    errors += std::memcmp(metric, metric_ref, sizeof metric) != 0;
    std::printf(errors ? "FAIL\n" : "PASS\n");
    return errors ? 1 : 0;
}
