#ifndef MSEKIT_H
#define MSEKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum MsekitStatus {
  MSEKIT_STATUS_OK = 0,
  MSEKIT_STATUS_NULL_POINTER = 1,
  MSEKIT_STATUS_INVALID_UTF8 = 2,
  // The problem JSON failed validation.
  MSEKIT_STATUS_SCHEMA = 3,
  MSEKIT_STATUS_IO = 4,
  // A pipeline stage (meshing, solving, conjugation, ...) failed.
  MSEKIT_STATUS_STAGE = 5,
  // Output buffer shorter than required; nothing was written.
  MSEKIT_STATUS_BUFFER_TOO_SMALL = 6,
  MSEKIT_STATUS_INVALID_ARGUMENT = 7,
  MSEKIT_STATUS_PANIC = 8,
} MsekitStatus;

// A triangulated planar domain.
typedef struct MsekitDomain MsekitDomain;

// A validated problem spec.
typedef struct MsekitProblem MsekitProblem;

// The report of a finished run.
typedef struct MsekitReport MsekitReport;

// A discrete minimal graph on a domain.
typedef struct MsekitSolution MsekitSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success. The pointer stays
// valid until the next call on the same thread.
const char *msekit_last_error(void);

// Library version as a static NUL-terminated string.
const char *msekit_version(void);

// Parse and validate a problem spec given as JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum MsekitStatus msekit_problem_parse(const char *json, struct MsekitProblem **out);

// # Safety
// `p` must come from [`msekit_problem_parse`] or be null.
void msekit_problem_free(struct MsekitProblem *p);

// Run a problem, writing artifacts into `out_dir`.
//
// # Safety
// `problem` must be a live handle, `out_dir` a NUL-terminated string, `out` a valid pointer.
enum MsekitStatus msekit_run(const struct MsekitProblem *problem,
                             const char *out_dir,
                             struct MsekitReport **out);

// Whether every check in the report passed (1) or not (0).
//
// # Safety
// `r` must be a live handle.
int32_t msekit_report_passed(const struct MsekitReport *r);

// The report as JSON, owned by the handle.
//
// # Safety
// `r` must be a live handle; the string dies with it.
const char *msekit_report_json(const struct MsekitReport *r);

// # Safety
// `r` must come from [`msekit_run`] or be null.
void msekit_report_free(struct MsekitReport *r);

// Axis-aligned rectangle `[x0, x0 + width] × [y0, y0 + height]` split into `nx × ny` cells.
// Its arcs are `bottom`, `right`, `top`, `left`.
//
// # Safety
// `out` must be a valid pointer.
enum MsekitStatus msekit_domain_rectangle(double x0,
                                          double y0,
                                          double width,
                                          double height,
                                          uintptr_t nx,
                                          uintptr_t ny,
                                          struct MsekitDomain **out);

// # Safety
// `d` must be a live handle.
uintptr_t msekit_domain_vertex_count(const struct MsekitDomain *d);

// Copy vertex positions as interleaved `x, y` pairs; `len` counts doubles.
//
// # Safety
// `d` must be a live handle and `xy` point to `len` writable doubles.
enum MsekitStatus msekit_domain_positions(const struct MsekitDomain *d, double *xy, uintptr_t len);

// Whether vertex `v` lies on the boundary (1) or not (0); out-of-range vertices give 0.
//
// # Safety
// `d` must be a live handle.
int32_t msekit_domain_is_boundary(const struct MsekitDomain *d, uintptr_t v);

// # Safety
// `d` must come from a domain constructor or be null.
void msekit_domain_free(struct MsekitDomain *d);

// Solve the Dirichlet problem. `values` holds one entry per vertex; only boundary entries
// are read. A non-positive `tol` selects the default tolerance.
//
// # Safety
// `d` must be a live handle, `values` point to `len` doubles and `out` be valid.
enum MsekitStatus msekit_solve_dirichlet(const struct MsekitDomain *d,
                                         const double *values,
                                         uintptr_t len,
                                         double tol,
                                         struct MsekitSolution **out);

// Copy the vertex values of a solution; `len` must be at least the vertex count.
//
// # Safety
// `s` must be a live handle and `u` point to `len` writable doubles.
enum MsekitStatus msekit_solution_values(const struct MsekitSolution *s, double *u, uintptr_t len);

// Final Newton residual of a solution.
//
// # Safety
// `s` must be a live handle.
double msekit_solution_residual(const struct MsekitSolution *s);

// # Safety
// `s` must come from [`msekit_solve_dirichlet`] or be null.
void msekit_solution_free(struct MsekitSolution *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MSEKIT_H */
