#include <cstdint>

// LMS adaptive FIR: 16 taps over 32 samples, weights updated per sample.
constexpr int SAMPLES = 32;
constexpr int TAPS = 16;
constexpr int MU_SHIFT = 6;

void lms_filter(const int32_t x[SAMPLES + TAPS], const int32_t desired[SAMPLES],
                int32_t weights[TAPS], int32_t err_out[SAMPLES]) {
    SAMPLE: for (int n = 0; n < SAMPLES; n++) {
        int32_t y = 0;
        TAP: for (int k = 0; k < TAPS; k++) {
            y += weights[k] * x[n + k];
        }
        int32_t err = desired[n] - y;
        int32_t step = (err * x[n]) >> MU_SHIFT;
        weights[n % TAPS] += step;
        err_out[n] = err;
    }
}
