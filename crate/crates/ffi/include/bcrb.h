#ifndef BCRB_H
#define BCRB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

// Result codes returned by every fallible function.
typedef enum BcrbStatus {
  BCRB_STATUS_OK = 0,
  BCRB_STATUS_NULL_POINTER = -1,
  BCRB_STATUS_INVALID_ARGUMENT = -2,
  BCRB_STATUS_VALIDATION = -3,
  BCRB_STATUS_PARSE = -4,
  BCRB_STATUS_UNSTABLE = -5,
  BCRB_STATUS_INFEASIBLE = -6,
  BCRB_STATUS_IO = -7,
  BCRB_STATUS_PANIC = -99,
} BcrbStatus;

// Cavity selector accepted wherever a `system` argument appears.
typedef enum BcrbSystem {
  BCRB_SYSTEM_BCRB = 0,
  BCRB_SYSTEM_ORIGINAL = 1,
} BcrbSystem;

// Opaque scenario handle.
typedef struct BcrbScenario BcrbScenario;

// Power chain at one operating point.
typedef struct BcrbPowerBudget {
  // Effective limiting aperture (m).
  double aperture;
  // Transmission loss.
  double delta_t;
  // External beam power (W).
  double p_beam;
  // PV electrical output (W).
  double p_out;
} BcrbPowerBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null if none occurred.
// The pointer stays valid until the next failing call on the same thread.
const char *bcrb_last_error_message(void);

// Reference scenario with the calibrated loss scale.
struct BcrbScenario *bcrb_scenario_new_default(void);

// Parses a scenario from a NUL-terminated JSON document.
//
// # Safety
// `json` must be a valid C string; `out` must be writable.
enum BcrbStatus bcrb_scenario_from_json(const char *json, bool strict, struct BcrbScenario **out);

// Loads a scenario file.
//
// # Safety
// `path` must be a valid C string; `out` must be writable.
enum BcrbStatus bcrb_scenario_load(const char *path, bool strict, struct BcrbScenario **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `scenario` must be null or a live handle from this library.
void bcrb_scenario_free(struct BcrbScenario *scenario);

// Serializes the scenario to JSON; release the result with [`bcrb_string_free`].
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum BcrbStatus bcrb_scenario_to_json(const struct BcrbScenario *scenario, char **out);

// Round-trip ABCD matrix at distance `d`, written row-major to `out[4]`.
//
// # Safety
// `scenario` must be a live handle; `out` must hold four doubles.
enum BcrbStatus bcrb_round_trip(const struct BcrbScenario *scenario,
                                int32_t system,
                                double d,
                                double *out);

// Stability flag `0 < A·D < 1` at distance `d`.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum BcrbStatus bcrb_is_stable(const struct BcrbScenario *scenario,
                               int32_t system,
                               double d,
                               bool *out);

// Spot radii ω₁, ω₂, ω₃ (m) written to `out[3]`.
//
// # Safety
// `scenario` must be a live handle; `out` must hold three doubles.
enum BcrbStatus bcrb_spot_radii(const struct BcrbScenario *scenario,
                                int32_t system,
                                double d,
                                double *out);

// Loss, beam power and PV output with the scenario's loss scale and
// clamping choice.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum BcrbStatus bcrb_power_budget(const struct BcrbScenario *scenario,
                                  int32_t system,
                                  double d,
                                  double p_in,
                                  double mu,
                                  struct BcrbPowerBudget *out);

// Spectral efficiency of the data branch for beam power `p_beam` and split
// ratio `mu`, in the scenario's log base.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum BcrbStatus bcrb_spectral_efficiency(const struct BcrbScenario *scenario,
                                         double p_beam,
                                         double mu,
                                         double *out);

// Upper edge (m) of the first stable distance band of the telescope cavity,
// searched up to `d_hi`.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum BcrbStatus bcrb_max_stable_distance(const struct BcrbScenario *scenario,
                                         double d_hi,
                                         double *out);

// Loss scale N fitted to the scenario's calibration anchor.
//
// # Safety
// `scenario` must be a live handle; `out` must be writable.
enum BcrbStatus bcrb_calibrate_n(const struct BcrbScenario *scenario, double *out);

// CSV dataset of a figure (`"fig6"` .. `"fig13"`) with default grids.
// Release the result with [`bcrb_string_free`].
//
// # Safety
// `scenario` must be a live handle; `id` a valid C string; `out` writable.
enum BcrbStatus bcrb_figure_csv(const struct BcrbScenario *scenario, const char *id, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void bcrb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BCRB_H */
