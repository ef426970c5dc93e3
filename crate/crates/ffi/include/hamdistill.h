#ifndef HAMDISTILL_H
#define HAMDISTILL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HdStatus {
  HD_STATUS_OK = 0,
  HD_STATUS_NULL_POINTER = 1,
  HD_STATUS_INVALID_UTF8 = 2,
  HD_STATUS_INVALID_ARGUMENT = 3,
  HD_STATUS_DOMAIN = 4,
  HD_STATUS_DIMENSION = 5,
  HD_STATUS_CAPACITY = 6,
  HD_STATUS_NOT_HERMITIAN = 7,
  HD_STATUS_NOT_TRACE_PRESERVING = 8,
  HD_STATUS_NUMERICAL = 9,
  HD_STATUS_CONFIG = 10,
  HD_STATUS_INCONSISTENT = 11,
  HD_STATUS_IO = 12,
  HD_STATUS_PANIC = 13,
} HdStatus;

typedef enum HdBasis {
  HD_BASIS_COMPUTATIONAL = 0,
  HD_BASIS_HADAMARD = 1,
} HdBasis;

typedef enum HdPath {
  HD_PATH_AUTO = 0,
  HD_PATH_PAULI_BRANCH = 1,
  HD_PATH_DENSITY_MATRIX = 2,
} HdPath;

/**
 * Opaque Hamiltonian with its cached spectral decomposition.
 */
typedef struct HdHamiltonian HdHamiltonian;

/**
 * Protocol outcome. Fields that do not apply are NaN.
 */
typedef struct HdOutcome {
  double fidelity;
  double yield_value;
  double per_pair_fidelity;
  double survival_probability;
  double error_free_fidelity;
  double std_error;
} HdOutcome;

typedef struct HdLinkBudget {
  double e_d;
  double beta;
  double y0;
  double alpha_db;
  double f_ec;
} HdLinkBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t hd_last_error(char *buf, uintptr_t len);

/**
 * Builds a named family (`diagonal`, `tfim_periodic`, `trapped_ion`,
 * `rydberg`, `haar_random`, `clifford_diagonal`) with default parameters.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be writable.
 */
enum HdStatus hd_hamiltonian_new(const char *family,
                                 uintptr_t n,
                                 uint64_t seed,
                                 struct HdHamiltonian **out);

/**
 * # Safety
 * `h` must be null or a handle from [`hd_hamiltonian_new`] not yet freed.
 */
void hd_hamiltonian_free(struct HdHamiltonian *h);

/**
 * Number of qubits per party, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
uintptr_t hd_hamiltonian_qubits(const struct HdHamiltonian *h);

/**
 * Protocol with local depolarizing noise of strength `p` on each qubit
 * and the delta-limit time average. `samples` = 0 selects exact
 * enumeration.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum HdStatus hd_run_protocol(const struct HdHamiltonian *h,
                              uintptr_t m,
                              double p,
                              enum HdBasis basis_kind,
                              enum HdPath path,
                              uintptr_t samples,
                              uint64_t seed,
                              struct HdOutcome *out);

/**
 * Probability that Pauli branch `pauli_index` (two bits per qubit, qubit 0
 * most significant; 0=I 1=X 2=Y 3=Z) is detected after evolving for `t`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum HdStatus hd_detection_probability(const struct HdHamiltonian *h,
                                       double t,
                                       uint64_t pauli_index,
                                       uintptr_t m,
                                       enum HdBasis basis_kind,
                                       double *out);

/**
 * Asymptotic error-rate tolerance at measured fraction `m_over_n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdStatus hd_noise_tolerance(double m_over_n, double *out);

/**
 * Finite-size error-rate tolerance for n pairs with m measured.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdStatus hd_finite_tolerance(uintptr_t n, uintptr_t m, double f_ec, double *out);

/**
 * Default fiber link budget.
 */
struct HdLinkBudget hd_link_budget_default(void);

/**
 * Maximum QKD distance in km. `rounds` < 0 selects one-way
 * post-processing, `n` > 0 selects the diagonal-Hamiltonian protocol with
 * `m` measured pairs, otherwise `rounds` recurrence rounds.
 *
 * # Safety
 * `out` must be writable.
 */
enum HdStatus hd_qkd_max_distance(struct HdLinkBudget budget,
                                  int32_t rounds,
                                  uintptr_t n,
                                  uintptr_t m,
                                  double *out);

/**
 * Runs an experiment from config text and writes the CSV (and manifest)
 * to `csv_path`.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings.
 */
enum HdStatus hd_run_config(const char *config_text, const char *csv_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAMDISTILL_H */
