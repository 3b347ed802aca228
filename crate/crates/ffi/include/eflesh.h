#ifndef EFLESH_H
#define EFLESH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Values per magnetometer frame: five sensors, three axes each.
 */
#define EFLESH_CHANNELS 15

typedef enum EfleshMeshFormat {
  /**
   * Pick from the file extension.
   */
  EFLESH_MESH_FORMAT_AUTO = 0,
  EFLESH_MESH_FORMAT_STL_BINARY = 1,
  EFLESH_MESH_FORMAT_STL_ASCII = 2,
  EFLESH_MESH_FORMAT_OBJ = 3,
} EfleshMeshFormat;

typedef enum EfleshSolveStatus {
  EFLESH_SOLVE_STATUS_CONVERGED = 0,
  EFLESH_SOLVE_STATUS_NON_CONVERGENCE = 1,
  EFLESH_SOLVE_STATUS_OUT_OF_FOOTPRINT = 2,
} EfleshSolveStatus;

/**
 * Result of every fallible call. Codes 1 to 5 match the CLI exit codes.
 */
typedef enum EfleshStatus {
  EFLESH_STATUS_OK = 0,
  EFLESH_STATUS_USAGE = 1,
  EFLESH_STATUS_IO = 2,
  EFLESH_STATUS_GEOMETRY = 3,
  EFLESH_STATUS_FABRICATION = 4,
  EFLESH_STATUS_SIMULATION = 5,
  /**
   * A required pointer was null or a string was not UTF-8.
   */
  EFLESH_STATUS_INVALID_ARGUMENT = 6,
  /**
   * The library panicked; the handle involved should be freed and not reused.
   */
  EFLESH_STATUS_INTERNAL = 7,
} EfleshStatus;

/**
 * Opaque triangle mesh.
 */
typedef struct EfleshMesh EfleshMesh;

/**
 * Opaque sensor model.
 */
typedef struct EfleshSensorModel EfleshSensorModel;

typedef struct EfleshShellReport {
  bool closed;
  size_t boundary_edge_count;
  size_t nonmanifold_edge_count;
  double signed_volume;
  int64_t euler_characteristic;
} EfleshShellReport;

typedef struct EfleshLocalization {
  /**
   * Contact position, mm; z is indentation depth.
   */
  double x;
  double y;
  double z;
  /**
   * Signal residual norm, tesla.
   */
  double residual_norm;
  size_t iterations;
  enum EfleshSolveStatus status;
} EfleshLocalization;

typedef struct EfleshSensitivity {
  /**
   * Minimum detectable force, newtons.
   */
  double force;
  /**
   * Indentation at threshold, mm.
   */
  double depth;
  /**
   * Signal-norm threshold, tesla.
   */
  double threshold;
} EfleshSensitivity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *eflesh_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *eflesh_version(void);

/**
 * Reads an STL or OBJ file; coordinates are multiplied by `unit_scale`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EfleshStatus eflesh_mesh_load(const char *path,
                                   enum EfleshMeshFormat format,
                                   double unit_scale,
                                   struct EfleshMesh **out);

/**
 * # Safety
 * `mesh` must come from this library and not be freed twice. Null is ignored.
 */
void eflesh_mesh_free(struct EfleshMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle or null (returns 0).
 */
size_t eflesh_mesh_vertex_count(const struct EfleshMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle or null (returns 0).
 */
size_t eflesh_mesh_triangle_count(const struct EfleshMesh *mesh);

/**
 * Axis-aligned bounds into two arrays of three doubles.
 *
 * # Safety
 * `mesh` must be a live handle; `min` and `max` must each hold 3 doubles.
 */
enum EfleshStatus eflesh_mesh_bbox(const struct EfleshMesh *mesh, double *min, double *max);

/**
 * Closure and orientation report for the mesh treated as one shell.
 *
 * # Safety
 * `mesh` must be a live handle and `out` a valid pointer.
 */
enum EfleshStatus eflesh_mesh_validate(const struct EfleshMesh *mesh,
                                       struct EfleshShellReport *out);

/**
 * # Safety
 * `mesh` must be a live handle and `path` a NUL-terminated string.
 */
enum EfleshStatus eflesh_mesh_save(const struct EfleshMesh *mesh,
                                   const char *path,
                                   enum EfleshMeshFormat format);

/**
 * The built-in four-magnet, five-sensor model. Never null.
 */
struct EfleshSensorModel *eflesh_sensor_model_default(void);

/**
 * Parses a model from the JSON the CLI `sensor-model` command prints.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EfleshStatus eflesh_sensor_model_from_json(const char *json, struct EfleshSensorModel **out);

/**
 * # Safety
 * `model` must come from this library and not be freed twice. Null is ignored.
 */
void eflesh_sensor_model_free(struct EfleshSensorModel *model);

/**
 * Predicted frame for a contact at (x, y) mm pressed `depth` mm.
 *
 * # Safety
 * `model` must be a live handle and `out` must hold `EFLESH_CHANNELS` doubles.
 */
enum EfleshStatus eflesh_forward_signal(const struct EfleshSensorModel *model,
                                        double x,
                                        double y,
                                        double depth,
                                        double *out);

/**
 * Contact that best explains one frame. `guess` may be null.
 *
 * # Safety
 * `model` must be a live handle, `signal` must hold `EFLESH_CHANNELS`
 * doubles, `guess` is null or holds 3 doubles, `out` is a valid pointer.
 */
enum EfleshStatus eflesh_localize(const struct EfleshSensorModel *model,
                                  const double *signal,
                                  const double *guess,
                                  struct EfleshLocalization *out);

/**
 * Minimum detectable force at 6σ for per-channel noise `sigma` (T) and
 * contact stiffness `stiffness` (N/mm).
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum EfleshStatus eflesh_sensitivity(const struct EfleshSensorModel *model,
                                     double sigma,
                                     double stiffness,
                                     struct EfleshSensitivity *out);

/**
 * Flux density (T) of the model's magnets at a point given in metres.
 *
 * # Safety
 * `model` must be a live handle; `point` and `out` must each hold 3 doubles.
 */
enum EfleshStatus eflesh_field_at(const struct EfleshSensorModel *model,
                                  const double *point,
                                  double *out);

/**
 * 1-based layer after which to pause for a cavity whose top is at
 * `cavity_top` mm.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EfleshStatus eflesh_pause_layer(double cavity_top, double layer_height, uint32_t *out);

/**
 * Beam width (mm) for a modulus ratio in (0, 1), clamped up to `min_beam`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EfleshStatus eflesh_modulus_to_beam(double modulus_ratio,
                                         double cell_size,
                                         double min_beam,
                                         double *out);

/**
 * Runs the full build described by a config JSON file and writes the
 * bundle to its output folder, relative to the config's directory.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string.
 */
enum EfleshStatus eflesh_run_pipeline(const char *config_path, bool keep_intermediates);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EFLESH_H */
