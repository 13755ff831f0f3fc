"""Two-stage passage retrieval toolkit.

Pipeline stages: mine equivalent-query pairs from relevance judgments,
build a BM25 index and retrieve candidates, expand queries with paraphrase
beams, rerank candidates with a pluggable scorer under a fixed token
budget, and evaluate runs with MAP / nDCG / P@10 plus per-topic bucket
comparison against committee statistics.
"""

__version__ = "0.1.0"

from .bm25 import (Bm25Params, Bm25Retriever, INDEX_FORMAT_VERSION,
                   InvertedIndex, bm25_score, build_index, idf, retrieve_topk,
                   to_candidate_set)
from .clients import ParaphraseClient, RequestsTransport, ScoreClient
from .corpus_io import (CandidateSet, PassageRecord, Qrels, QueryRecord,
                        RunFileEntry, iter_candidate_sets, load_collection,
                        load_qrels, load_queries, load_run_file, load_top1000,
                        parse_collection, parse_qrels, parse_queries,
                        parse_run_file, parse_top1000, query_store,
                        write_qrels, write_run_file, write_top1000)
from .errors import (CapacityError, ConfigError, ContractViolation,
                     DuplicateKeyError, NotFoundError, ParseError,
                     ProtocolError, QxrankError, ServiceError,
                     ValidationError)
from .evaluation import (BUCKETS, EvalResult, FractionSummary, MetricConfig,
                         PerTopicStats, TopicBucketReport, average_precision,
                         classify_buckets, classify_topic, evaluate_rankings,
                         load_committee_stats, mean_over_topics, ndcg,
                         precision_at_k, rankings_from_run, read_per_topic,
                         render_bucket_report, summarize_fractions,
                         write_per_topic)
from .expansion import (ExpandedQuery, FilterPolicy, ParaphraseBeam,
                        QueryExpander, assemble, fetch_expansions,
                        filter_beams, load_precomputed_expansions,
                        parse_filter_policy, write_expansions)
from .pair_mining import (EquivalentQueryPair, PairMiningReport,
                          PassageQueryGroup, export_seq2seq, group_by_passage,
                          mine_pairs, mining_report, write_mining_report,
                          write_pairs)
from .rerank import (ConstantScorer, LabeledPair, LexicalOverlapScorer,
                     OracleScorer, PrecomputedScorer, Ranking, RemoteScorer,
                     ScorerInput, TruncationConfig, lexical_overlap_scorer,
                     load_labeled_pairs, load_precomputed_scores, make_scorer,
                     prepare_input, rerank, sample_training_pairs,
                     truncate_texts, write_labeled_pairs,
                     write_precomputed_scores)
from .tokenization import (SubwordVocab, light_stem, subword_tokenize,
                           tokenize, truncate_words_by_subword_budget)
