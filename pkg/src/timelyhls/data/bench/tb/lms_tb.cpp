#include <cstdint>
#include <cstdio>
#include <cstring>

constexpr int SAMPLES = 32;
constexpr int TAPS = 16;
constexpr int MU_SHIFT = 6;

void lms_filter(const int32_t x[SAMPLES + TAPS], const int32_t desired[SAMPLES],
                int32_t weights[TAPS], int32_t err_out[SAMPLES]);

int main() {
    static int32_t x[SAMPLES + TAPS], desired[SAMPLES];
    static int32_t weights[TAPS], weights_ref[TAPS];
    static int32_t err[SAMPLES], err_ref[SAMPLES];
    for (int i = 0; i < SAMPLES + TAPS; i++) {
        x[i] = (i * 11) % 29 - 14;
    }
    for (int i = 0; i < SAMPLES; i++) {
        desired[i] = (i * 7) % 31 - 15;
    }
    std::memset(weights, 0, sizeof weights);
    std::memset(weights_ref, 0, sizeof weights_ref);
    for (int n = 0; n < SAMPLES; n++) {
        int32_t y = 0;
        for (int k = 0; k < TAPS; k++) {
            y += weights_ref[k] * x[n + k];
        }
        int32_t e = desired[n] - y;
        weights_ref[n % TAPS] += (e * x[n]) >> MU_SHIFT;
        err_ref[n] = e;
    }
    lms_filter(x, desired, weights, err);
    int errors = std::memcmp(err, err_ref, sizeof err) != 0;
    errors += std::memcmp(weights, weights_ref, sizeof weights) != 0;
    std::printf(errors ? "FAIL\n" : "PASS\n");
    return errors ? 1 : 0;
}
