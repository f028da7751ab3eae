#ifndef FOCKIMPL_H
#define FOCKIMPL_H

/* Generated by cbindgen from fockimpl-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Statistics of a Bogoliubov map.
 */
typedef enum FockimplKind {
  FOCKIMPL_KIND_CAR = 0,
  FOCKIMPL_KIND_CCR = 1,
} FockimplKind;

/**
 * Status codes returned by every entry point.
 */
typedef enum FockimplStatus {
  FOCKIMPL_STATUS_OK = 0,
  FOCKIMPL_STATUS_NULL_POINTER = 1,
  FOCKIMPL_STATUS_INVALID_INPUT = 2,
  FOCKIMPL_STATUS_STRUCTURAL = 3,
  FOCKIMPL_STATUS_PRECONDITION = 4,
  FOCKIMPL_STATUS_RESOURCE = 5,
  FOCKIMPL_STATUS_NUMERICAL = 6,
  FOCKIMPL_STATUS_CUTOFF = 7,
  FOCKIMPL_STATUS_IO = 8,
  FOCKIMPL_STATUS_BUFFER_TOO_SMALL = 9,
  FOCKIMPL_STATUS_PANIC = 10,
} FockimplStatus;

/**
 * Opaque fermionic implementer family `{Ψ_α}`.
 */
typedef struct FockimplCarFamily FockimplCarFamily;

/**
 * Opaque bosonic implementer family on truncated Fock spaces.
 */
typedef struct FockimplCcrFamily FockimplCcrFamily;

/**
 * Opaque Bogoliubov map `K(n) -> K(m)`.
 */
typedef struct FockimplMap FockimplMap;

/**
 * Residuals of the Cuntz relations of a family.
 */
typedef struct FockimplCuntzResiduals {
  double gram;
  double completeness;
  double intertwining;
} FockimplCuntzResiduals;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Human-readable name of a status code (static storage).
 */
const char *fockimpl_status_string(enum FockimplStatus status);

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL,
 * or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t fockimpl_last_error(char *buf, size_t len);

/**
 * Release a string returned by the library.
 *
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void fockimpl_string_free(char *s);

/**
 * Parse a map from the JSON operator format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FockimplStatus fockimpl_map_from_json(const char *json, struct FockimplMap **out);

/**
 * Build a map from its full `2m x 2n` matrix (row-major, interleaved).
 *
 * # Safety
 * `data` must point to `8 m n` doubles; `out` must be writable.
 */
enum FockimplStatus fockimpl_map_new(enum FockimplKind kind,
                                     size_t source_modes,
                                     size_t target_modes,
                                     const double *data,
                                     struct FockimplMap **out);

/**
 * Release a map.
 *
 * # Safety
 * `map` must be null or a handle from this library, freed once.
 */
void fockimpl_map_free(struct FockimplMap *map);

/**
 * Mode counts and Fredholm index `2(n - m)`.
 *
 * # Safety
 * `map` must be a valid handle; output pointers must be writable.
 */
enum FockimplStatus fockimpl_map_shape(const struct FockimplMap *map,
                                       size_t *source_modes,
                                       size_t *target_modes,
                                       int64_t *index);

/**
 * Copy the full matrix into `buf` (`len` doubles).
 *
 * # Safety
 * `map` must be a valid handle; `buf` must hold `len` doubles.
 */
enum FockimplStatus fockimpl_map_matrix(const struct FockimplMap *map, double *buf, size_t len);

/**
 * `out = a ∘ b`.
 *
 * # Safety
 * `a`, `b` must be valid handles; `out` must be writable.
 */
enum FockimplStatus fockimpl_map_compose(const struct FockimplMap *a,
                                         const struct FockimplMap *b,
                                         struct FockimplMap **out);

/**
 * Serialize a map in the JSON operator format.
 *
 * # Safety
 * `map` must be a valid handle; `out` must be writable.
 */
enum FockimplStatus fockimpl_map_to_json(const struct FockimplMap *map, char **out);

/**
 * JSON analysis report (the output of `fockimpl car analyze` or
 * `fockimpl ccr analyze`). `pass` receives 1 when all checks hold.
 *
 * # Safety
 * `map` must be a valid handle; `out` and `pass` must be writable.
 */
enum FockimplStatus fockimpl_analyze(const struct FockimplMap *map, char **out, int32_t *pass);

/**
 * The character `χ(V) = (-1)^{dim h_V}` of a fermionic map.
 *
 * # Safety
 * `map` must be a valid handle; `chi` must be writable.
 */
enum FockimplStatus fockimpl_car_chi(const struct FockimplMap *map, int32_t *chi);

/**
 * Build the fermionic implementer family of `map`.
 *
 * # Safety
 * `map` must be a valid handle; `out` must be writable.
 */
enum FockimplStatus fockimpl_car_family_new(const struct FockimplMap *map,
                                            struct FockimplCarFamily **out);

/**
 * Release a fermionic family.
 *
 * # Safety
 * `family` must be null or a handle from this library, freed once.
 */
void fockimpl_car_family_free(struct FockimplCarFamily *family);

/**
 * Number of members `2^{M_V}`.
 *
 * # Safety
 * `family` must be a valid handle; `len` must be writable.
 */
enum FockimplStatus fockimpl_car_family_len(const struct FockimplCarFamily *family, size_t *len);

/**
 * Copy member `member` (a `2^m x 2^n` matrix) into `buf`.
 *
 * # Safety
 * `family` must be a valid handle; `buf` must hold `len` doubles.
 */
enum FockimplStatus fockimpl_car_family_member(const struct FockimplCarFamily *family,
                                               size_t member,
                                               double *buf,
                                               size_t len);

/**
 * Residuals of `Ψ_α*Ψ_β = δ_{αβ}`, `Σ Ψ_α Ψ_α* = 1` and intertwining.
 *
 * # Safety
 * `family` must be a valid handle; `out` must be writable.
 */
enum FockimplStatus fockimpl_car_family_verify(const struct FockimplCarFamily *family,
                                               struct FockimplCuntzResiduals *out);

/**
 * Build the bosonic implementer family at particle cutoff `n_max` with
 * multi-indices of length at most `n_terms`.
 *
 * # Safety
 * `map` must be a valid handle; `out` must be writable.
 */
enum FockimplStatus fockimpl_ccr_family_new(const struct FockimplMap *map,
                                            size_t n_max,
                                            size_t n_terms,
                                            struct FockimplCcrFamily **out);

/**
 * Release a bosonic family.
 *
 * # Safety
 * `family` must be null or a handle from this library, freed once.
 */
void fockimpl_ccr_family_free(struct FockimplCcrFamily *family);

/**
 * Number of members (multi-indices up to the requested length).
 *
 * # Safety
 * `family` must be a valid handle; `len` must be writable.
 */
enum FockimplStatus fockimpl_ccr_family_len(const struct FockimplCcrFamily *family, size_t *len);

/**
 * Cutoff-aware residuals on source states with at most `probe` particles.
 * Returns `Cutoff` (with the residuals still written) when any exceeds
 * the cutoff tolerance.
 *
 * # Safety
 * `family` must be a valid handle; `out` must be writable.
 */
enum FockimplStatus fockimpl_ccr_family_verify(const struct FockimplCcrFamily *family,
                                               size_t probe,
                                               struct FockimplCuntzResiduals *out);

/**
 * Squared Hilbert–Schmidt norms of the off-diagonal blocks of the
 * truncated chiral Dirac isometry at Fourier cutoff `n_max`.
 *
 * # Safety
 * Output pointers must be writable.
 */
enum FockimplStatus fockimpl_dirac_hs(size_t n_max, double *plus_minus, double *minus_plus);

/**
 * The example map `V(φ): K(k) -> K(k+1)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FockimplStatus fockimpl_example_vphi(double phi, size_t k, struct FockimplMap **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOCKIMPL_H */
