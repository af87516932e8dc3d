/* Copyright 2026 darkgate Contributors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef DARKGATE_H
#define DARKGATE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Gate model selector.
 */
#define DG_MODEL_HEFF_PRIME 0

#define DG_MODEL_H2Q 1

#define DG_MODEL_H2Q_RESONANT 2

#define DG_MODEL_RESONANT_WITH_CORRECTIONS 3

typedef enum DgStatus {
  DG_STATUS_OK = 0,
  DG_STATUS_NULL_POINTER = 1,
  DG_STATUS_INVALID_ARGUMENT = 2,
  DG_STATUS_STEP_TOO_LARGE = 3,
  DG_STATUS_INVARIANT_VIOLATED = 4,
  DG_STATUS_IO = 5,
  DG_STATUS_PANIC = 6,
} DgStatus;

/**
 * Opaque device handle.
 */
typedef struct DgDevice DgDevice;

/**
 * Numerical settings. `dt <= 0` selects the largest admissible step.
 */
typedef struct DgOptions {
  uint32_t n_max;
  double dt;
  uint32_t grid_n;
} DgOptions;

/**
 * Device parameters. Qutrit decay rates of the upper transitions follow from
 * the lower ones.
 */
typedef struct DgDeviceParams {
  double omega_a;
  double omega_b;
  double omega_f;
  double omega1_ge;
  double omega1_es;
  double omega2_ge;
  double omega2_es;
  double g1_ge;
  double g2_ge;
  double gf_a;
  double gf_b;
  double kappa_a;
  double kappa_b;
  double kappa_f;
  double gamma1_ge;
  double gamma2_ge;
} DgDeviceParams;

typedef struct DgPeak {
  double fidelity;
  double time;
  double leakage;
} DgPeak;

/**
 * Tomography result; matrices are row-major, ordered `gg, ge, eg, ee`.
 */
typedef struct DgTomography {
  double time;
  double re[16];
  double im[16];
  double deviation;
  double leakage[4];
  bool degraded;
} DgTomography;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dg_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 */
size_t dg_last_error_message(char *buf, size_t len);

/**
 * Default numerical settings.
 */
struct DgOptions dg_options_default(void);

enum DgStatus dg_device_new(const struct DgDeviceParams *params, struct DgDevice **out);

/**
 * Creates a device from a shipped preset (`paper_sec3_fig3`, `paper_sec4`).
 */
enum DgStatus dg_device_from_preset(const char *name, struct DgDevice **out);

/**
 * Releases a device. Null is ignored.
 */
void dg_device_free(struct DgDevice *dev);

enum DgStatus dg_device_params(const struct DgDevice *dev, struct DgDeviceParams *out);

/**
 * Gate time and required upper-transition coupling of qutrit 2 for
 * timing integers `k`, `m`.
 */
enum DgStatus dg_gate_timing(uint32_t k, uint32_t m, double g1_ge, double *t_gate, double *g2_es);

/**
 * Largest c-phase fidelity of the maximal superposition over `points`
 * uniformly spaced times in `[t_from, t_to]`.
 */
enum DgStatus dg_fidelity_peak(const struct DgDevice *dev,
                               uint32_t model,
                               struct DgOptions opts,
                               double t_from,
                               double t_to,
                               uint32_t points,
                               struct DgPeak *out);

/**
 * Average gate fidelity at the gate time, with losses.
 */
enum DgStatus dg_average_gate_fidelity(const struct DgDevice *dev,
                                       struct DgOptions opts,
                                       double *out);

/**
 * Projected gate matrix at time `t`; a non-positive or NaN `t` selects the
 * gate time.
 */
enum DgStatus dg_tomography(const struct DgDevice *dev,
                            uint32_t model,
                            struct DgOptions opts,
                            double t,
                            struct DgTomography *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DARKGATE_H */
