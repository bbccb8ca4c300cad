#include <stdio.h>
#include "condbench.h"

int main(void) {
    CbEnv *env = NULL;
    if (cb_env_new_trace_conditioning(7, 13, 1, &env) != CB_STATUS_OK) {
        fprintf(stderr, "%s\n", cb_last_error());
        return 1;
    }
    size_t n = cb_env_channels(env);
    size_t us_at = cb_env_us_index(env);
    unsigned char obs[64];
    unsigned char us[1000];
    for (int t = 0; t < 1000; t++) {
        if (cb_env_step(env, obs, sizeof obs, NULL) != CB_STATUS_OK) return 1;
        us[t] = obs[us_at];
    }
    double g[1000];
    size_t scored = 0;
    if (cb_compute_returns(us, 1000, cb_env_discount(env), 1e-6, g, &scored) != CB_STATUS_OK) return 1;
    printf("channels=%zu scored=%zu g0=%.6f\n", n, scored, g[0]);
    cb_env_free(env);
    return 0;
}
