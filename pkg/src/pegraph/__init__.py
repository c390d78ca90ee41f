"""Structural academic-literature retrieval.

Builds paper evolution graphs: a corpus is soft-clustered into topical
communities by jointly factorizing citation, content and authorship
relations; each query-relevant community contributes its most coherent
chronological chain of papers, and the chains merge into one graph.
"""

from .chains import CandidatePool, QuerySpec, best_chain
from .coherence import (
    Chain,
    CoherenceResult,
    TopicSequence,
    coherence_evolving_topic,
    coherence_fixed_topic,
    solve_maximin_lp,
)
from .corpus import (
    Corpus,
    PaperRecord,
    RelationSet,
    Vocabulary,
    build_relations,
    build_vocabulary,
    load_corpus,
    tfidf_weight,
)
from .engine import EngineConfig, EngineIndex, build_index, load_index, save_index
from .errors import (
    CorpusParseError,
    DegeneratePaperError,
    NumericError,
    PegraphError,
    QueryError,
    ValidationError,
)
from .factorization import (
    MetaFacModel,
    TopicDistribution,
    assign_communities,
    factorize,
    objective_value,
    topic_distribution,
)
from .influence import (
    BipartiteWalkGraph,
    InfluenceProfile,
    build_walk_graph,
    topic_similarity,
    visit_probabilities,
    word_influence_vector,
)
from .peg import EvolutionGraph, export_graph, graph_from_json, merge_chains, run_query

__version__ = "0.1.0"
