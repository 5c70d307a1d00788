"""Text-query search over frame-embedding stores of gameplay videos."""

from .embedding import (
    EmbedderSpec,
    HttpEmbedder,
    MockEmbedder,
    cosine_similarity,
    mock_embed,
    normalize,
    normalize_rows,
)
from .errors import (
    BadMagicError,
    CorruptManifestError,
    DimensionMismatchError,
    EmbedderUnavailableError,
    EmptyVideoError,
    GpvsError,
    UnknownGameError,
    VersionUnsupportedError,
    ZeroVectorError,
)
from .evaluation import (
    EvalCell,
    EvalReport,
    QueryEntry,
    QuerySet,
    RelevanceJudgment,
    index_judgments,
    load_query_set,
    packaged_query_set,
    read_judgments,
    recall_at_5,
    render_text,
    run_experiment,
    top_k_accuracy,
)
from .search import (
    DEFAULT_POOL_SIZE,
    AggregationMethod,
    FrameHit,
    RankedVideo,
    SearchRequest,
    aggregate_max,
    aggregate_pool_count,
    score_frames,
    search,
    top_frames,
)
from .store import (
    UNRESOLVED,
    FrameRecord,
    GameCatalog,
    RejectReason,
    StoreHandle,
    SubmissionMeta,
    VideoEntry,
    build_store,
    open_store,
    read_submissions,
    resolve_game_name,
    validate_submission,
)

__version__ = "0.1.0"
