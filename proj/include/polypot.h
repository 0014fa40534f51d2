/*
  Copyright (c) 2026 polypot contributors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/

/*
  C interface to the polypot engine: multilingual program-of-thought
  execution, answer routing and dataset construction.

  An engine is created from a JSON configuration string (pass NULL or ""
  for built-in defaults) and drives every pipeline command through file
  paths. Commands return POLYPOT_OK or an error status; the message for
  the most recent failure and the JSON summary of the most recent success
  are retained on the engine handle.

  Engine handles are not thread-safe; use one handle per thread.
*/

#ifndef POLYPOT_H
#define POLYPOT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum polypot_status {
  POLYPOT_OK = 0,
  POLYPOT_ERR_USAGE = 1,     /* bad arguments or invalid request */
  POLYPOT_ERR_IO = 2,        /* missing or unreadable files */
  POLYPOT_ERR_CONFIG = 3,    /* invalid configuration or templates */
  POLYPOT_ERR_TOOLCHAIN = 4, /* object-language toolchain unavailable */
  POLYPOT_ERR_BACKEND = 5,   /* model backend failure */
  POLYPOT_ERR_PARSE = 6,     /* unparseable data */
  POLYPOT_ERR_INTERNAL = 7
} polypot_status;

typedef struct polypot_engine polypot_engine;

const char* polypot_version(void);
const char* polypot_status_name(polypot_status status);

/* Write the built-in default engine configuration (JSON) into buffer.
   Returns the required size including the NUL terminator; the buffer is
   filled only when capacity suffices. */
size_t polypot_default_config(char* buffer, size_t capacity);

/* config_json: engine configuration (JSON object); NULL or empty uses the
   defaults. On success *out_engine owns the handle. */
polypot_status polypot_engine_create(const char* config_json,
                                     polypot_engine** out_engine);
void polypot_engine_destroy(polypot_engine* engine);

/* Message of the most recent failed call on this engine ("" if none). */
const char* polypot_engine_last_error(const polypot_engine* engine);

/* JSON summary of the most recent successful command ("" if none). */
const char* polypot_engine_last_summary(const polypot_engine* engine);

/* Execute a solutions JSONL file ({question_id, language, source} per
   line) and write outcomes JSONL. */
polypot_status polypot_run_exec(polypot_engine* engine,
                                const char* solutions_path,
                                const char* out_path);

/* Generate candidate programs for a corpus, execute-and-filter them, and
   write sft.jsonl / rejected.jsonl / matrix.json / stats under out_dir.
   options_json (may be NULL): {"format": "plain|gsm8k|math",
   "exemplars": "auto|gsm8k|math", "max_tokens": n, "temperature": t}. */
polypot_status polypot_run_datagen(polypot_engine* engine,
                                   const char* corpus_path,
                                   const char* out_dir,
                                   const char* options_json);

/* Route every corpus question with one strategy; write decisions JSONL.
   Strategies: single:<lang>, random, upper-bound, self-consistency,
   prior-scorer, posterior-scorer, vote-score, case-based.
   solutions_path may be NULL: candidates are then generated through the
   model backend (prior strategies generate only the selected language).
   options_json (may be NULL): {"format": ..., "threshold": n,
   "train_matrix": path, "exemplars": ..., "max_tokens": n,
   "temperature": t}. */
polypot_status polypot_run_route(polypot_engine* engine, const char* strategy,
                                 const char* corpus_path,
                                 const char* solutions_path,
                                 const char* out_path,
                                 const char* options_json);

/* Evaluate comma-separated strategies over a corpus; write report.csv,
   report.md and decisions.jsonl under out_dir. solutions_path may be
   NULL, as in polypot_run_route. */
polypot_status polypot_run_eval(polypot_engine* engine,
                                const char* strategies_csv,
                                const char* corpus_path,
                                const char* solutions_path,
                                const char* out_dir,
                                const char* options_json);

/* Preference pairs (correct x incorrect program per question) from a
   correctness matrix file. */
polypot_status polypot_run_export_prefs(polypot_engine* engine,
                                        const char* matrix_path,
                                        const char* out_path);

/* Per-language scorer training JSONL files; mode is "prior" or
   "posterior". */
polypot_status polypot_run_export_scorer_data(polypot_engine* engine,
                                              const char* matrix_path,
                                              const char* mode,
                                              const char* out_dir);

/* Kept-count table (CSV + Markdown) from a correctness matrix;
   corpus_path may be NULL. */
polypot_status polypot_run_stats(polypot_engine* engine,
                                 const char* matrix_path,
                                 const char* corpus_path,
                                 const char* out_csv, const char* out_md);

/* Normalize raw program stdout to its canonical answer string. is_number
   (may be NULL) receives 1 for numeric answers, 0 for text. Fails with
   POLYPOT_ERR_PARSE on empty stdout and POLYPOT_ERR_USAGE when the
   buffer is too small. */
polypot_status polypot_parse_answer(const char* raw_stdout, char* buffer,
                                    size_t capacity, int* is_number);

/* Tolerant answer equivalence on two raw answer strings. Returns 1, 0,
   or -1 on error (empty input or negative tolerance). */
int polypot_answers_equal(const char* a, const char* b, double abs_tol,
                          double rel_tol);

#ifdef __cplusplus
}
#endif

#endif /* POLYPOT_H */
