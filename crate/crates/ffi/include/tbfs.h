#ifndef TBFS_H
#define TBFS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TbfsBackend {
  TBFS_BACKEND_PACKED = 0,
  TBFS_BACKEND_SPILL = 1,
} TbfsBackend;

typedef enum TbfsFormat {
  TBFS_FORMAT_EDGELIST = 0,
  TBFS_FORMAT_DIMACS = 1,
  TBFS_FORMAT_CSR = 2,
} TbfsFormat;

typedef enum TbfsKind {
  TBFS_KIND_GNM = 0,
  TBFS_KIND_PATH = 1,
  TBFS_KIND_STAR = 2,
  TBFS_KIND_GRID = 3,
  TBFS_KIND_D_REGULAR = 4,
  TBFS_KIND_DEGREE_SORTED = 5,
} TbfsKind;

typedef enum TbfsPow3 {
  TBFS_POW3_TABLE = 0,
  TBFS_POW3_STRIDED = 1,
  TBFS_POW3_SQUARING = 2,
} TbfsPow3;

typedef enum TbfsStatus {
  TBFS_STATUS_OK = 0,
  TBFS_STATUS_NULL_POINTER = 1,
  TBFS_STATUS_INVALID_ARGUMENT = 2,
  TBFS_STATUS_IO = 3,
  TBFS_STATUS_PARSE = 4,
  TBFS_STATUS_VERIFICATION = 5,
  TBFS_STATUS_INTERNAL = 6,
  TBFS_STATUS_PANIC = 7,
  TBFS_STATUS_BUFFER_TOO_SMALL = 8,
} TbfsStatus;

/**
 * A loaded or generated graph.
 */
typedef struct TbfsGraph TbfsGraph;

/**
 * The records and metrics of one search.
 */
typedef struct TbfsRun TbfsRun;

/**
 * Search options. `stride` is used only with `TBFS_POW3_STRIDED`.
 */
typedef struct TbfsConfig {
  enum TbfsBackend backend;
  enum TbfsPow3 pow3;
  size_t stride;
  bool audit;
} TbfsConfig;

/**
 * One output record; `parent` is 0 for a root.
 */
typedef struct TbfsRecord {
  uint32_t vertex;
  uint32_t parent;
  uint32_t distance;
} TbfsRecord;

/**
 * Headline numbers of a run.
 */
typedef struct TbfsSummary {
  size_t n;
  size_t m;
  bool succinct;
  uint64_t peak_bits;
  uint64_t min_color_bits;
  int64_t extra_bits;
  /**
   * 0 when the plain store was used.
   */
  uint64_t extra_bound;
  uint64_t roots;
  uint32_t max_distance;
  double wall_time_ms;
} TbfsSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *tbfs_version(void);

/**
 * Copies the last error message of this thread into `buf`.
 *
 * # Safety
 * `buf` must be writable for `cap` bytes; `needed` may be null.
 */
enum TbfsStatus tbfs_last_error(char *buf, size_t cap, size_t *needed);

/**
 * Reads a graph file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum TbfsStatus tbfs_graph_load(const char *path,
                                enum TbfsFormat format,
                                bool directed,
                                struct TbfsGraph **out);

/**
 * Builds a graph from `m` pairs stored as `edges[2i], edges[2i+1]`, with
 * vertices numbered from 1.
 *
 * # Safety
 * `edges` must hold `2·m` values (may be null when `m` is 0); `out` writable.
 */
enum TbfsStatus tbfs_graph_from_edges(size_t n,
                                      const uint32_t *edges,
                                      size_t m,
                                      bool directed,
                                      struct TbfsGraph **out);

/**
 * Generates a synthetic graph; `m` is the edge count, or the degree for
 * `TBFS_KIND_D_REGULAR`.
 *
 * # Safety
 * `out` must be writable.
 */
enum TbfsStatus tbfs_graph_generate(enum TbfsKind kind,
                                    size_t n,
                                    size_t m,
                                    uint64_t seed,
                                    bool directed,
                                    struct TbfsGraph **out);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t tbfs_graph_vertices(const struct TbfsGraph *g);

/**
 * Edge count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t tbfs_graph_edges(const struct TbfsGraph *g);

/**
 * # Safety
 * `g` must be null or a handle not freed before.
 */
void tbfs_graph_free(struct TbfsGraph *g);

/**
 * Packed backend, full power table, no audit.
 */
struct TbfsConfig tbfs_config_default(void);

/**
 * Searches `g` from the vertices of `order` in turn (identity when
 * `order` is null). Bound violations found by the instrumentation fail
 * with `TBFS_STATUS_INTERNAL` and no run is returned.
 *
 * # Safety
 * `g` must be live, `order` null or `order_len` readable values, `config`
 * null (defaults) or valid, `out` writable.
 */
enum TbfsStatus tbfs_run(const struct TbfsGraph *g,
                         const uint32_t *order,
                         size_t order_len,
                         const struct TbfsConfig *config,
                         struct TbfsRun **out);

/**
 * Number of records, which is the vertex count.
 *
 * # Safety
 * `r` must be null or a live run handle.
 */
size_t tbfs_run_record_count(const struct TbfsRun *r);

/**
 * Copies records `start .. start+cap` in output order; `written` receives
 * the number copied.
 *
 * # Safety
 * `r` must be live, `buf` writable for `cap` records, `written` writable.
 */
enum TbfsStatus tbfs_run_records(const struct TbfsRun *r,
                                 size_t start,
                                 struct TbfsRecord *buf,
                                 size_t cap,
                                 size_t *written);

/**
 * # Safety
 * `r` must be live and `out` writable.
 */
enum TbfsStatus tbfs_run_summary(const struct TbfsRun *r, struct TbfsSummary *out);

/**
 * The full metrics document as NUL-terminated JSON.
 *
 * # Safety
 * `r` must be live, `buf` writable for `cap` bytes, `needed` null or writable.
 */
enum TbfsStatus tbfs_run_metrics_json(const struct TbfsRun *r,
                                      char *buf,
                                      size_t cap,
                                      size_t *needed);

/**
 * Checks the records of `r` against a reference search of `g`.
 *
 * # Safety
 * `r` and `g` must be live, and `g` the graph `r` was computed on.
 */
enum TbfsStatus tbfs_run_verify(const struct TbfsRun *r, const struct TbfsGraph *g);

/**
 * # Safety
 * `r` must be null or a handle not freed before.
 */
void tbfs_run_free(struct TbfsRun *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TBFS_H */
