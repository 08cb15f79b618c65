#ifndef QAT_H
#define QAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum QatStatus {
  Ok = 0,
  NullPointer = 1,
  InvalidArgument = 2,
  CapacityExceeded = 3,
  Internal = 4,
} QatStatus;

// Opaque Hamiltonian handle.
typedef struct QatHamiltonian QatHamiltonian;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent error on this thread; the pointer stays valid
// until the next failing call on the same thread.
const char *qat_last_error_message(void);

// Library version as a static string.
const char *qat_version(void);

// Creates a built-in Hamiltonian ("h1" or "h2").
//
// # Safety
// `name` must be a valid NUL-terminated string and `out` a valid pointer.
enum QatStatus qat_hamiltonian_builtin(const char *name, struct QatHamiltonian **out);

// Builds a Hamiltonian from a dense row-major matrix of interleaved
// (re, im) pairs; `dim` is the matrix dimension (a power of two).
//
// # Safety
// `entries` must point to `2 * dim * dim` doubles; `out` must be valid.
enum QatStatus qat_hamiltonian_from_dense(const double *entries,
                                          size_t dim,
                                          struct QatHamiltonian **out);

// Releases a Hamiltonian handle; a null handle is a no-op.
//
// # Safety
// `handle` must come from a `qat_hamiltonian_*` constructor and must not be
// used afterwards.
void qat_hamiltonian_free(struct QatHamiltonian *handle);

// Number of qubits of the Hamiltonian.
//
// # Safety
// `handle` must be a live handle.
int qat_hamiltonian_qubits(const struct QatHamiltonian *handle);

// Copies the ascending eigenvalues into `out` (length `len >= dim`).
//
// # Safety
// `handle` must be live and `out` must hold at least `len` doubles.
enum QatStatus qat_hamiltonian_eigenvalues(const struct QatHamiltonian *handle,
                                           double *out,
                                           size_t len);

// Perceptron activation angle q(theta) = arctan(tan^2 theta).
double qat_q_activation(double theta);

// Perceptron success probability cos^4 + sin^4.
double qat_p_success(double theta);

// Preactivation sum x.w + bias.
//
// # Safety
// `inputs` and `weights` must point to `len` doubles each; `out` valid.
enum QatStatus qat_preactivation(const double *inputs,
                                 const double *weights,
                                 size_t len,
                                 double bias,
                                 double *out);

// Noiseless perceptron thermalisation series from input |0>: writes
// simulated fidelity, predicted fidelity and the angle estimate for
// T = 1..=iterations into the three buffers (each holding `iterations`
// doubles; `predicted`/`q_estimate` may be null).
//
// # Safety
// Non-null buffers must hold at least `iterations` doubles.
enum QatStatus qat_perceptron_series(double theta,
                                     uint32_t iterations,
                                     bool trailing_reset,
                                     double *simulated,
                                     double *predicted,
                                     double *q_estimate);

// Noiseless groundstate thermalisation series: simulated and predicted
// fidelity for T = 1..=iterations. `scramble_mode` 0 = exact eigenbasis,
// 1 = local Hadamards.
//
// # Safety
// `handle` must be live; non-null buffers must hold `iterations` doubles.
enum QatStatus qat_groundstate_series(const struct QatHamiltonian *handle,
                                      size_t precision,
                                      uint32_t iterations,
                                      int scramble_mode,
                                      double *simulated,
                                      double *predicted);

// Simulated success probability of depth-k fixed-point amplification of a
// perceptron unit with per-application success `p0`, with an optional
// phase-angle error.
//
// # Safety
// `out` must be a valid pointer.
enum QatStatus qat_oaa_success(double p0, uint32_t k, double angle_error, double *out);

// Closed-form amplified success probability 1 - (1 - p0)^(3^k).
double qat_oaa_predicted(double p0, uint32_t k);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAT_H */
