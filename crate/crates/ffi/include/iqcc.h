#ifndef IQCC_H
#define IQCC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes. Zero is success.
 */
typedef enum IqccStatus {
  IQCC_STATUS_OK = 0,
  IQCC_STATUS_NULL_POINTER = 1,
  IQCC_STATUS_INVALID_UTF8 = 2,
  IQCC_STATUS_PARSE = 3,
  IQCC_STATUS_INVALID_ARGUMENT = 4,
  IQCC_STATUS_DIMENSION_MISMATCH = 5,
  IQCC_STATUS_BUDGET_EXCEEDED = 6,
  IQCC_STATUS_FIT_REJECTED = 7,
  IQCC_STATUS_IO = 8,
  IQCC_STATUS_CONTRACT_VIOLATION = 9,
  IQCC_STATUS_OUT_OF_RANGE = 10,
  IQCC_STATUS_PANIC = 11,
} IqccStatus;

typedef enum IqccMapping {
  IQCC_MAPPING_JORDAN_WIGNER = 0,
  IQCC_MAPPING_PARITY = 1,
} IqccMapping;

typedef enum IqccPool {
  IQCC_POOL_DIS = 0,
  IQCC_POOL_FERMIONIC_SD = 1,
  IQCC_POOL_TWO_QUBIT_PAULI = 2,
} IqccPool;

/*
 A qubit Hamiltonian.
 */
typedef struct IqccOperator IqccOperator;

/*
 The energies and final Hamiltonian of a finished run.
 */
typedef struct IqccRun IqccRun;

/*
 Loop settings. Fill with `iqcc_run_options_default` and adjust.
 */
typedef struct IqccRunOptions {
  size_t n_g;
  size_t n_steps;
  enum IqccPool pool;
  double grad_threshold;
  double energy_threshold;
  /*
   Compression threshold in hartree; zero or negative disables it.
   */
  double epsilon;
  size_t n_random_guesses;
  uint64_t rng_seed;
} IqccRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *iqcc_last_error(void);

void iqcc_string_free(char *s);

/*
 Parse the line format `<coefficient> <letters>`.
 */
enum IqccStatus iqcc_operator_parse(const char *text_in, struct IqccOperator **out);

/*
 Map FCIDUMP text to qubits. With `reduce` set, stationary qubits are
 removed in the sector of lowest energy.
 */
enum IqccStatus iqcc_operator_from_fcidump(const char *text_in,
                                           enum IqccMapping mapping,
                                           bool reduce,
                                           struct IqccOperator **out);

void iqcc_operator_free(struct IqccOperator *op);

/*
 Qubit count, or 0 for a null handle.
 */
size_t iqcc_operator_n_qubits(const struct IqccOperator *op);

/*
 Term count, or 0 for a null handle.
 */
size_t iqcc_operator_len(const struct IqccOperator *op);

/*
 Text form of the operator; release with `iqcc_string_free`.
 */
enum IqccStatus iqcc_operator_to_text(const struct IqccOperator *op, char **out);

/*
 Lowest eigenvalue by exact diagonalization.
 */
enum IqccStatus iqcc_ground_energy(const struct IqccOperator *op, double *out);

enum IqccStatus iqcc_compress(const struct IqccOperator *op,
                              double epsilon,
                              struct IqccOperator **out);

/*
 Conjugate by `exp(-i tau P / 2)` for the Pauli word `P`, e.g. "XYZI".
 */
enum IqccStatus iqcc_dress(const struct IqccOperator *op,
                           const char *generator,
                           double tau,
                           struct IqccOperator **out);

struct IqccRunOptions iqcc_run_options_default(void);

enum IqccStatus iqcc_run(const struct IqccOperator *op,
                         const struct IqccRunOptions *options,
                         struct IqccRun **out);

void iqcc_run_free(struct IqccRun *run);

/*
 Number of recorded energies, including the mean-field start.
 */
size_t iqcc_run_len(const struct IqccRun *run);

enum IqccStatus iqcc_run_energy(const struct IqccRun *run, size_t k, double *out);

/*
 Extrapolated energy; fails with `FitRejected` when no fit was possible.
 */
enum IqccStatus iqcc_run_extrapolated_energy(const struct IqccRun *run, double *out);

/*
 Copy of the final dressed Hamiltonian.
 */
enum IqccStatus iqcc_run_hamiltonian(const struct IqccRun *run, struct IqccOperator **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IQCC_H */
