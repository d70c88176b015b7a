#ifndef COCYCLAB_H
#define COCYCLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(COCYCLAB_BUILDING_LIBRARY)
#define CL_API __attribute__((visibility("default")))
#else
#define CL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cl_status {
  CL_OK = 0,
  CL_DEGENERATE_AXES,
  CL_LOG_DOMAIN,
  CL_OVERFLOW,
  CL_EMPTY_CELL,
  CL_HORIZON_EXCEEDED,
  CL_UNSUPPORTED,
  CL_BUDGET_EXHAUSTED,
  CL_NO_BALANCED_INDEX,
  CL_STEERING_FAILED,
  CL_COVERING_FAILED,
  CL_CERTIFICATION_FAILED,
  CL_SEARCH_FAILED,
  CL_NOT_REPRESENTABLE,
  CL_DISJOINTNESS_FAILED,
  CL_SHRINK_EXHAUSTED,
  CL_RESOLUTION_EXCEEDED,
  CL_NOT_APPLICABLE,
  CL_BLEND_BOUND_VIOLATED,
  CL_DECOMPOSITION_FAILED,
  CL_LIFT_FAILED,
  CL_INVALID_ARGUMENT,
  CL_IO,
  CL_INTERNAL
} cl_status;

typedef struct cl_base cl_base;
typedef struct cl_cocycle cl_cocycle;
typedef struct cl_run cl_run;

CL_API const char* cl_status_name(cl_status s);
/* Message of the last failure on the calling thread. */
CL_API const char* cl_last_error(void);

CL_API cl_status cl_base_circle(double alpha, int grid, cl_base** out);
CL_API cl_status cl_base_golden(int grid, cl_base** out);
CL_API cl_status cl_base_silver(int grid, cl_base** out);
CL_API cl_status cl_base_torus(const double* translation, int dim, int grid, cl_base** out);
CL_API cl_status cl_base_sturmian(double slope, int depth, int grid, cl_base** out);
/* Empty string when the angle is far from rational; owned by the handle. */
CL_API const char* cl_base_warning(const cl_base* b);
CL_API void cl_base_free(cl_base* b);

CL_API cl_status cl_cocycle_schrodinger(const cl_base* b, double energy, double coupling, cl_cocycle** out);
CL_API cl_status cl_cocycle_rotation(const cl_base* b, double phase, int frequency, cl_cocycle** out);
CL_API cl_status cl_cocycle_constant(const cl_base* b, double a, double bb, double c, double d, cl_cocycle** out);
CL_API cl_status cl_cocycle_hopf(const cl_base* b, double alpha, cl_cocycle** out);
/* count matrices, row-major a b c d each, at the grid points k / count. */
CL_API cl_status cl_cocycle_table(const cl_base* b, const double* entries, size_t count, cl_cocycle** out);
CL_API const char* cl_cocycle_describe(const cl_cocycle* co);
CL_API void cl_cocycle_free(cl_cocycle* co);

CL_API cl_status cl_lyapunov(const cl_cocycle* co, double x, int64_t n, double* out);

/* Every run produces named text artifacts and a verdict: passed = 1 for a
   certified success, 0 for a certified failure. */
CL_API cl_status cl_run_exponent(const cl_cocycle* co, int64_t horizon, unsigned threads, cl_run** out);
CL_API cl_status cl_run_growth_test(const cl_cocycle* co, double eps, int64_t horizon, unsigned threads,
                                    cl_run** out);
CL_API cl_status cl_run_uh_check(const cl_cocycle* co, unsigned threads, cl_run** out);
CL_API cl_status cl_run_steer(const cl_cocycle* co, double x, double from_angle, double to_angle, double eps,
                              int m_max, cl_run** out);
/* Window, N and plans at `anchors` points drawn from seed (or at x when
   anchors is 0). */
CL_API cl_status cl_run_plan_segment(const cl_cocycle* co, double eps, double x, int anchors, uint64_t seed,
                                     unsigned threads, cl_run** out);
CL_API cl_status cl_run_castle(const cl_base* b, int64_t n, unsigned threads, cl_run** out);
CL_API cl_status cl_run_freq_bound(const cl_base* b, const double* points, size_t count, double eps,
                                   unsigned threads, cl_run** out);
/* horizon 0 selects ceil(10 (N + 1) / eps), raised past n0 if needed. */
CL_API cl_status cl_run_surgery(const cl_cocycle* co, double eps, int64_t horizon, unsigned threads, cl_run** out);
CL_API cl_status cl_run_demo_hopf(double alpha, int grid, unsigned threads, cl_run** out);
CL_API cl_status cl_run_selftest(unsigned threads, cl_run** out);

CL_API int cl_run_passed(const cl_run* r);
CL_API const char* cl_run_summary(const cl_run* r);
CL_API size_t cl_run_artifact_count(const cl_run* r);
CL_API const char* cl_run_artifact_name(const cl_run* r, size_t i);
CL_API const char* cl_run_artifact_data(const cl_run* r, size_t i, size_t* size);
CL_API void cl_run_free(cl_run* r);

#ifdef __cplusplus
}
#endif

#endif
