#ifndef DISSENT_H
#define DISSENT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum DissentNotion {
  DISSENT_NOTION_SP = 0,
  DISSENT_NOTION_AE = 1,
  DISSENT_NOTION_CAL = 2,
  DISSENT_NOTION_EO = 3,
  DISSENT_NOTION_PE = 4,
  DISSENT_NOTION_OMR = 5,
} DissentNotion;

typedef enum DissentRate {
  /**
   * `P(y = k | m)`
   */
  DISSENT_RATE_SP = 0,
  /**
   * `P(s = 1 | y = k, m)`
   */
  DISSENT_RATE_DR_CELL = 1,
  /**
   * `P(s = 1 | m)`; the label argument is ignored.
   */
  DISSENT_RATE_DR_GROUP = 2,
} DissentRate;

typedef enum DissentStatus {
  DISSENT_STATUS_OK = 0,
  DISSENT_STATUS_NULL_POINTER = 1,
  DISSENT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The requested value has a zero denominator or too few groups.
   */
  DISSENT_STATUS_UNDEFINED = 3,
  DISSENT_STATUS_PANIC = 4,
} DissentStatus;

typedef enum DissentUndefinedCells {
  DISSENT_UNDEFINED_CELLS_DROP = 0,
  DISSENT_UNDEFINED_CELLS_ZERO = 1,
} DissentUndefinedCells;

/**
 * Opaque oracle table built from full `(y, z)` pairs.
 */
typedef struct DissentJoint DissentJoint;

/**
 * Opaque rate table.
 */
typedef struct DissentRateTable DissentRateTable;

/**
 * One audited input. `intrinsic_label < 0` means the critic's own label is
 * unknown; otherwise `disagreement` is ignored and derived from the labels.
 */
typedef struct DissentRecord {
  uint32_t group;
  uint32_t system_label;
  bool disagreement;
  int32_t intrinsic_label;
} DissentRecord;

typedef struct DissentNotionValue {
  double value;
  /**
   * -1 for group-level notions.
   */
  int32_t argmax_label;
  uint32_t argmax_high;
  uint32_t argmax_low;
  uint32_t excluded_cells;
} DissentNotionValue;

typedef struct DissentBounds {
  double lower;
  double upper;
  double estimate;
  uint32_t excluded_cells;
} DissentBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *dissent_last_error(void);

/**
 * Library version, a static NUL-terminated string.
 */
const char *dissent_version(void);

enum DissentStatus dissent_derive_disagreement(uint32_t labels,
                                               uint32_t system_label,
                                               uint32_t intrinsic_label,
                                               bool *out);

/**
 * Builds a rate table. `alpha` is additive smoothing (0 disables it).
 */
enum DissentStatus dissent_rate_table_new(const struct DissentRecord *records_ptr,
                                          size_t len,
                                          uint32_t labels,
                                          uint32_t groups,
                                          double alpha,
                                          struct DissentRateTable **out);

void dissent_rate_table_free(struct DissentRateTable *table);

/**
 * Replaces the statistical-parity rates of `table` with those of `pooled`.
 */
enum DissentStatus dissent_rate_table_use_pooled_sp(struct DissentRateTable *table,
                                                    const struct DissentRateTable *pooled);

enum DissentStatus dissent_rate(const struct DissentRateTable *table,
                                enum DissentRate kind,
                                uint32_t group,
                                uint32_t label,
                                double *out);

/**
 * Statistical parity, accuracy equality or calibration.
 */
enum DissentStatus dissent_definite_notion(const struct DissentRateTable *table,
                                           enum DissentNotion notion,
                                           struct DissentNotionValue *out);

/**
 * Per-cell lower bound of equal opportunity, predictive equality or
 * overall misclassification.
 */
enum DissentStatus dissent_lower_bound(const struct DissentRateTable *table,
                                       enum DissentNotion notion,
                                       uint32_t group,
                                       uint32_t label,
                                       double *out);

/**
 * Gap bounds and midpoint estimate of an indefinite notion.
 */
enum DissentStatus dissent_bounded_notion(const struct DissentRateTable *table,
                                          enum DissentNotion notion,
                                          struct DissentBounds *out);

/**
 * Oracle table; every record needs `intrinsic_label >= 0`.
 */
enum DissentStatus dissent_joint_new(const struct DissentRecord *records_ptr,
                                     size_t len,
                                     uint32_t labels,
                                     uint32_t groups,
                                     struct DissentJoint **out);

void dissent_joint_free(struct DissentJoint *joint);

/**
 * Ground-truth value of any notion from full label pairs.
 */
enum DissentStatus dissent_true_notion(const struct DissentJoint *joint,
                                       enum DissentNotion notion,
                                       enum DissentUndefinedCells cells,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISSENT_H */
