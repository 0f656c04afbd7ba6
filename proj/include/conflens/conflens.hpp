#ifndef CONFLENS_CONFLENS_HPP_
#define CONFLENS_CONFLENS_HPP_

#include "conflens/analysis.hpp"
#include "conflens/archive.hpp"
#include "conflens/corpus_stats.hpp"
#include "conflens/gerrit.hpp"
#include "conflens/kruskal_wallis.hpp"
#include "conflens/lexer.hpp"
#include "conflens/model_io.hpp"
#include "conflens/ngram.hpp"
#include "conflens/report.hpp"
#include "conflens/review.hpp"
#include "conflens/token_sets.hpp"

namespace conflens {

inline constexpr const char *version_string = "conflens 0.1.0";

} // namespace conflens

#endif // CONFLENS_CONFLENS_HPP_
