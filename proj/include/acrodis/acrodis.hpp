#pragma once

// Umbrella header: acronym disambiguation via paragraph-vector context
// embeddings. Rule-based expansion matching discovers candidates in a
// corpus, per-acronym PV-DM / PV-DBOW models embed the contexts they occur
// in, and cosine similarity against the query context picks the expansion.

#include "acrodis/corpus_io.hpp"
#include "acrodis/disambiguator.hpp"
#include "acrodis/embedding.hpp"
#include "acrodis/errors.hpp"
#include "acrodis/eval.hpp"
#include "acrodis/matcher.hpp"
#include "acrodis/matrix.hpp"
#include "acrodis/pca.hpp"
#include "acrodis/rng.hpp"
#include "acrodis/seqmatch.hpp"
#include "acrodis/textproc.hpp"
#include "acrodis/types.hpp"
