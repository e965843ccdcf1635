#ifndef GREENPACK_H
#define GREENPACK_H

/* Generated by cbindgen from the greenpack-ffi crate sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Outcome of a call into this interface.
 */
typedef enum GpStatus {
  /*
   The call succeeded.
   */
  GP_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  GP_STATUS_NULL_ARGUMENT = 1,
  /*
   An argument was malformed: bad UTF-8, an unknown format or mode name,
   or output that cannot be represented as a C string.
   */
  GP_STATUS_INVALID_ARGUMENT = 2,
  /*
   The input text could not be parsed.
   */
  GP_STATUS_PARSE_ERROR = 3,
  /*
   The input parsed but violated an inventory invariant.
   */
  GP_STATUS_VALIDATION_ERROR = 4,
  /*
   A numeric argument or configuration value was out of its domain.
   */
  GP_STATUS_DOMAIN_ERROR = 5,
  /*
   No feasible placement exists for the requested consolidation.
   */
  GP_STATUS_PACKING_ERROR = 6,
  /*
   An underlying I/O operation failed.
   */
  GP_STATUS_IO_ERROR = 7,
  /*
   The library panicked; the handle state is unchanged.
   */
  GP_STATUS_PANIC = 8,
} GpStatus;

/*
 Opaque handle to a parsed, validated server inventory.
 */
typedef struct GpInventory GpInventory;

/*
 Opaque handle to a validated power curve.
 */
typedef struct GpPowerCurve GpPowerCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Returns the library version as a static NUL-terminated string.
 The pointer is valid for the lifetime of the process; do not free it.
 */
const char *gp_version(void);

/*
 Returns the message for the most recent failure on this thread, or null
 when the last call succeeded. The caller owns the returned string and must
 release it with `gp_string_free`.
 */
char *gp_last_error_message(void);

/*
 Releases a string previously returned by this library. Null is ignored.

 # Safety

 `string` must be null or a string returned by this library that has not
 been freed yet.
 */
void gp_string_free(char *string);

/*
 Parses and validates an inventory from `text`. `format` selects the
 encoding: `"csv"` or `"json"`. On success stores a new handle in `*out`;
 release it with `gp_inventory_free`.

 # Safety

 `text` and `format` must be null or NUL-terminated strings; `out` must be
 null or point to writable pointer storage.
 */
enum GpStatus gp_inventory_parse(const char *text, const char *format, struct GpInventory **out);

/*
 Releases an inventory handle. Null is ignored.

 # Safety

 `inventory` must be null or a handle from `gp_inventory_parse` that has
 not been freed yet.
 */
void gp_inventory_free(struct GpInventory *inventory);

/*
 Number of servers in the inventory. Returns 0 for a null handle.

 # Safety

 `inventory` must be null or a live handle from `gp_inventory_parse`.
 */
size_t gp_inventory_server_count(const struct GpInventory *inventory);

/*
 Writes the ids of servers whose utilization is strictly below `threshold`
 as a JSON array of strings at `*out`. `threshold` must be a fraction in
 [0, 1]. Release the string with `gp_string_free`.

 # Safety

 `inventory` must be null or a live handle from `gp_inventory_parse`;
 `out` must be null or point to writable pointer storage.
 */
enum GpStatus gp_inventory_dead_json(const struct GpInventory *inventory,
                                     double threshold,
                                     char **out);

/*
 Returns a handle to the built-in three-anchor power curve. Release it with
 `gp_power_curve_free`.
 */
struct GpPowerCurve *gp_power_curve_default(void);

/*
 Parses and validates a power curve from JSON. On success stores a new
 handle in `*out`; release it with `gp_power_curve_free`.

 # Safety

 `json` must be null or a NUL-terminated string; `out` must be null or
 point to writable pointer storage.
 */
enum GpStatus gp_power_curve_parse(const char *json, struct GpPowerCurve **out);

/*
 Releases a power curve handle. Null is ignored.

 # Safety

 `curve` must be null or a handle from `gp_power_curve_default` or
 `gp_power_curve_parse` that has not been freed yet.
 */
void gp_power_curve_free(struct GpPowerCurve *curve);

/*
 Evaluates the curve at `utilization` (a fraction in [0, 1]) and writes the
 draw in watts to `*watts`.

 # Safety

 `curve` must be null or a live power curve handle; `watts` must be null
 or point to writable storage for one double.
 */
enum GpStatus gp_power_curve_watts_at(const struct GpPowerCurve *curve,
                                      double utilization,
                                      double *watts);

/*
 Runs the full pipeline on `inventory` with default rules, ratios, targets,
 and curve, then renders the energy report. `mode` is `"fixed_ratio"` (or
 the short form `"fixed"`) or `"packed"`; `format` is `"text"`, `"csv"`, or
 `"json"`. Writes the rendered report to `*out`; release it with
 `gp_string_free`.

 # Safety

 `inventory` must be null or a live handle from `gp_inventory_parse`;
 `mode` and `format` must be null or NUL-terminated strings; `out` must be
 null or point to writable pointer storage.
 */
enum GpStatus gp_report_render(const struct GpInventory *inventory,
                               const char *mode,
                               const char *format,
                               char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GREENPACK_H */
