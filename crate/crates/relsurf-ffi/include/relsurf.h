#ifndef RELSURF_H
#define RELSURF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum RelsurfStatus {
  RELSURF_STATUS_OK = 0,
  RELSURF_STATUS_NULL_ARGUMENT = 1,
  RELSURF_STATUS_INVALID_UTF8 = 2,
  RELSURF_STATUS_IO = 3,
  RELSURF_STATUS_PARSE_ERROR = 4,
  RELSURF_STATUS_VALIDATION_ERROR = 5,
  RELSURF_STATUS_COMMAND_ERROR = 6,
} RelsurfStatus;

/**
 * Opaque workspace handle.
 */
typedef struct RelsurfWorkspace RelsurfWorkspace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The most recent error message on this thread, or null. The caller owns
 * the returned string and must free it with [`relsurf_string_free`].
 */
char *relsurf_last_error(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library and not yet
 * freed.
 */
void relsurf_string_free(char *s);

/**
 * Library version as a static string; do not free.
 */
const char *relsurf_version(void);

/**
 * Opens the built-in scenario workspace.
 *
 * # Safety
 * `out` must be a valid pointer to a workspace-handle slot.
 */
enum RelsurfStatus relsurf_workspace_builtin(struct RelsurfWorkspace **out);

/**
 * Loads a workspace from a circuit file and optional atom and deduction
 * files (null to omit).
 *
 * # Safety
 * `circuit_path` must be a valid C string; `atoms_path` and
 * `deductions_path` must each be null or a valid C string; `out` must be a
 * valid pointer to a workspace-handle slot.
 */
enum RelsurfStatus relsurf_workspace_open(const char *circuit_path,
                                          const char *atoms_path,
                                          const char *deductions_path,
                                          struct RelsurfWorkspace **out);

/**
 * Releases a workspace handle. Null is ignored.
 *
 * # Safety
 * `ws` must be a handle returned by this library and not yet freed.
 */
void relsurf_workspace_free(struct RelsurfWorkspace *ws);

/**
 * Runs a JSON command request (e.g. `{"cmd":"fr-demo"}`) against a
 * workspace. On success, `out_report_json` receives the JSON report (free
 * with [`relsurf_string_free`]) and `out_exit_code` (optional) receives the
 * CLI exit-code equivalent: 0 success, 4 invalid deduction step, 5 unsound
 * deduction.
 *
 * # Safety
 * `ws` must be a live handle from this library; `request_json` a valid C
 * string; `out_report_json` a valid pointer; `out_exit_code` null or valid.
 */
enum RelsurfStatus relsurf_run_json(const struct RelsurfWorkspace *ws,
                                    const char *request_json,
                                    char **out_report_json,
                                    int *out_exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELSURF_H */
