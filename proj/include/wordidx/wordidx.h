#ifndef WORDIDX_WORDIDX_H
#define WORDIDX_WORDIDX_H
/*
 * C interface to libwordidx.
 *
 * Words cross the boundary as big-endian byte strings of width/8 bytes, so
 * memcmp order equals key order. Key arrays are n such strings back to back.
 * Functions return a widx_status; on failure widx_last_error() describes the
 * problem (per thread, valid until the next failing call).
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WIDX_API __declspec(dllexport)
#else
#define WIDX_API __attribute__((visibility("default")))
#endif

typedef enum widx_status {
    WIDX_OK = 0,
    WIDX_INVALID_ARGUMENT = 1,
    WIDX_WIDTH_MISMATCH = 2,
    WIDX_OUT_OF_RANGE = 3,
    WIDX_UNSORTED_KEYS = 4,
    WIDX_PARSE_ERROR = 5,
    WIDX_IO_ERROR = 6,
    WIDX_INTERNAL = 7,
    WIDX_NO_MEMORY = 8
} widx_status;

typedef enum widx_format { WIDX_FORMAT_HEX = 0, WIDX_FORMAT_BIN = 1 } widx_format;

WIDX_API const char* widx_status_name(widx_status status);
WIDX_API const char* widx_last_error(void);

/* 16, 256 or 65536 */
WIDX_API int widx_width_supported(unsigned width);
/* width / log2(width) */
WIDX_API unsigned widx_chunk_size(unsigned width);

/* ---- operation counters (per thread) ---- */

typedef struct widx_counts {
    uint64_t shifts;
    uint64_t boolean_ops;
    uint64_t arith_ops;
    uint64_t comparisons;
    uint64_t multiplications;
    uint64_t index_probes;
    uint64_t key_probes;
} widx_counts;

WIDX_API void widx_counts_get(widx_counts* out);
WIDX_API void widx_counts_reset(void);

/* ---- random numbers: xoshiro256** seeded through splitmix64 ---- */

typedef struct widx_rng widx_rng;

WIDX_API widx_status widx_rng_new(uint64_t seed, widx_rng** out);
WIDX_API void widx_rng_free(widx_rng* rng);
WIDX_API uint64_t widx_rng_next(widx_rng* rng);
/* uniform in [0, bound); bound > 0 */
WIDX_API uint64_t widx_rng_below(widx_rng* rng, uint64_t bound);
WIDX_API widx_status widx_rng_word(widx_rng* rng, unsigned width, uint8_t* out);

/* ---- words and word files ---- */

/* out receives width/4 hex digits and a terminating NUL. */
WIDX_API widx_status widx_word_to_hex(unsigned width, const uint8_t* word, char* out, size_t cap);
WIDX_API widx_status widx_word_from_hex(unsigned width, const char* hex, uint8_t* out);

/* Reads a whole word file; *out must be released with widx_buffer_free. */
WIDX_API widx_status widx_words_read(const char* path, unsigned width, widx_format format, uint8_t** out,
                                     size_t* count);
WIDX_API widx_status widx_words_write(const char* path, unsigned width, widx_format format, const uint8_t* words,
                                      size_t count);
WIDX_API void widx_buffer_free(void* buffer);

/* Fails with WIDX_UNSORTED_KEYS unless the keys are strictly ascending. */
WIDX_API widx_status widx_keys_check(unsigned width, const uint8_t* keys, size_t count);

/* ---- bit selector ---- */

typedef struct widx_selector widx_selector;

/* k <= width/log2(width) indices, each < width. */
WIDX_API widx_status widx_selector_new(unsigned width, const unsigned* indices, size_t k, widx_selector** out);
WIDX_API void widx_selector_free(widx_selector* sel);
WIDX_API widx_status widx_selector_select(const widx_selector* sel, const uint8_t* x, uint8_t* out);
/* x_phases and mask_phases each receive 8 words (phases 0..7); mask_phases may be NULL. */
WIDX_API widx_status widx_selector_trace(const widx_selector* sel, const uint8_t* x, uint8_t* x_phases,
                                         uint8_t* mask_phases);
WIDX_API unsigned widx_selector_word_count(const widx_selector* sel);
/* out receives widx_selector_word_count() words. */
WIDX_API widx_status widx_selector_words(const widx_selector* sel, uint8_t* out);

/* ---- gamma node: at most width/log2(width) keys ---- */

typedef struct widx_gamma widx_gamma;

/* Copies the keys. */
WIDX_API widx_status widx_gamma_new(unsigned width, const uint8_t* keys, size_t count, widx_gamma** out);
WIDX_API void widx_gamma_free(widx_gamma* g);
WIDX_API uint64_t widx_gamma_index_bits(const widx_gamma* g);
/* Blind search: rank of a key sharing the longest prefix with x. */
WIDX_API widx_status widx_gamma_search(const widx_gamma* g, const uint8_t* x, unsigned* rank, unsigned* iterations);
/* Smallest key >= x; *found = 0 when x exceeds every key. key_out may be NULL. */
WIDX_API widx_status widx_gamma_successor(const widx_gamma* g, const uint8_t* x, int* found, unsigned* rank,
                                          uint8_t* key_out);
/* Selector plan words; plan word 1 is the selection mask. */
WIDX_API unsigned widx_gamma_plan_word_count(const widx_gamma* g);
WIDX_API widx_status widx_gamma_plan_word(const widx_gamma* g, unsigned word, uint8_t* out);
WIDX_API widx_status widx_gamma_corrupt_plan_word(widx_gamma* g, unsigned word, const uint8_t* flip);

/* ---- randomized rank structure ---- */

typedef struct widx_beta widx_beta;

WIDX_API widx_status widx_beta_new(unsigned width, const uint8_t* keys, size_t count, uint64_t seed,
                                   widx_beta** out);
WIDX_API void widx_beta_free(widx_beta* b);
WIDX_API uint64_t widx_beta_index_bits(const widx_beta* b);
WIDX_API unsigned widx_beta_height(const widx_beta* b);
/* rank = number of keys <= x; fallback = 1 when the hashed descent had to be repaired. */
WIDX_API widx_status widx_beta_rank(const widx_beta* b, const uint8_t* x, unsigned* rank, int* fallback,
                                    unsigned* depth);
WIDX_API widx_status widx_beta_corrupt_bit(widx_beta* b, uint64_t pos);

/* ---- successor index ---- */

typedef struct widx_index widx_index;

WIDX_API widx_status widx_index_new(unsigned width, const uint8_t* keys, size_t count, widx_index** out);
WIDX_API void widx_index_free(widx_index* idx);
WIDX_API unsigned widx_index_width(const widx_index* idx);
WIDX_API size_t widx_index_size(const widx_index* idx);
WIDX_API unsigned widx_index_chunk_count(const widx_index* idx);
/* Heads plus all gamma words; keys excluded. */
WIDX_API uint64_t widx_index_bits(const widx_index* idx);
/* Copies key rank (1-based) into out. */
WIDX_API widx_status widx_index_key(const widx_index* idx, size_t rank, uint8_t* out);
WIDX_API widx_status widx_index_successor(const widx_index* idx, const uint8_t* x, int* found, unsigned* rank,
                                          uint8_t* key_out);
/* Keys whose first len bits equal those of prefix (a full word); *found = 0 when none. */
WIDX_API widx_status widx_index_weak_prefix(const widx_index* idx, const uint8_t* prefix, unsigned len, int* found,
                                            unsigned* first, unsigned* last);
WIDX_API widx_status widx_index_save(const widx_index* idx, const char* path, widx_format format);
WIDX_API widx_status widx_index_load(const char* path, widx_format format, widx_index** out);
WIDX_API widx_status widx_index_plan_word(const widx_index* idx, unsigned chunk, unsigned word, uint8_t* out);
WIDX_API widx_status widx_index_corrupt_plan_word(widx_index* idx, unsigned chunk, unsigned word,
                                                  const uint8_t* flip);

#ifdef __cplusplus
}
#endif

#endif
