"""Word-embedding association measurement and provable subspace debiasing."""

__version__ = "0.1.0"

from .analogy_eval import AnalogyQuad, PreservationCurve, analogy_holds, analogy_strength, preservation_curves
from .association import (
    AssociationRow,
    WeatInput,
    WeatResult,
    delta_genderedness,
    genderedness,
    ripa,
    ripa_expected_glove,
    ripa_expected_sgns,
    weat,
    weat_effect_size,
    weat_p_value,
    weat_s,
)
from .corpus_stats import (
    CooccurrenceTable,
    ModelConstants,
    count_cooccurrences,
    cspmi,
    log_conditional_ratio,
    pmi,
    shifted_pmi_matrix,
)
from .debiasing import DebiasConfig, debias_embedding, debias_word, select_appropriate
from .embedding_store import EmbeddingSet, Vocabulary, load_embeddings, lookup, save_embeddings
from .errors import DegenerateError, EmbeddingFormatError, MissingTokenError, UnobservedPairError, WordAssocError
from .relations import (
    GENDER_DEFINING_PAIRS,
    BiasSubspace,
    RelationVector,
    WordPairSet,
    difference_vectors,
    first_principal_component,
    project_onto,
    scalar_projection,
    span_basis,
)
