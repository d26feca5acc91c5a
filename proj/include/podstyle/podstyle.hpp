// Umbrella header: the whole library.
#pragma once

#include "podstyle/common.hpp"
#include "podstyle/corpus.hpp"
#include "podstyle/engagement.hpp"
#include "podstyle/features.hpp"
#include "podstyle/lexicons.hpp"
#include "podstyle/model.hpp"
#include "podstyle/pipeline.hpp"
#include "podstyle/stats.hpp"
#include "podstyle/synth.hpp"
#include "podstyle/table.hpp"
#include "podstyle/textkit/langid.hpp"
#include "podstyle/textkit/normalize.hpp"
#include "podstyle/textkit/syllables.hpp"
#include "podstyle/textkit/tagger.hpp"
#include "podstyle/textkit/tokenize.hpp"
#include "podstyle/topics.hpp"
